#pragma once

// CSV rows for key-rate reports and JSON-lines run logs.

#include <iosfwd>
#include <string>
#include <vector>

#include "renyikey/finitesize.hpp"
#include "renyikey/optimizer.hpp"

namespace renyikey {

/// Column order: alpha, beta, N, p_gen, depol, loss, min_f, lambda_EC, g_alpha,
/// key_length, key_rate, fw_iters, fw_gap, dual_residual, status.
const std::vector<std::string>& csv_columns();
std::string csv_header();
/// Shortest round-trip formatting, so identical reports give identical bytes.
std::string csv_row(const KeyRateReport& r);

/// Round-trip text for a double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);

/// One JSON object per line: an "iteration" record per FW step, then a "bound"
/// record with the certified value and the final report.
void write_run_log(std::ostream& os, const KeyRateReport& report, const FWResult& fw, const CertifiedBound& bound);

}  // namespace renyikey
