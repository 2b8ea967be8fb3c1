#include "renyikey/finitesize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "renyikey/types.hpp"

namespace renyikey {

namespace {

void require_unit_open(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " = " << v << " must lie in (0, 1)";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

}  // namespace

void SecurityParams::validate() const {
  require_unit_open(eps_pa, "eps_PA");
  require_unit_open(eps_ev, "eps_EV");
  require_unit_open(eps_pe, "eps_PE");
}

std::int64_t FiniteSizeParams::m() const {
  return static_cast<std::int64_t>(std::llround((1.0 - p_gen) * static_cast<double>(n_total)));
}

double FiniteSizeParams::n_key() const { return p_gen * static_cast<double>(n_total); }

void FiniteSizeParams::validate() const {
  if (n_total < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive");
  require_unit_open(p_gen, "p_gen");
  if (!(f_ec >= 1.0)) throw Error(ErrorKind::InvalidArgument, "f_EC must be at least 1");
  if (m() < 1) throw Error(ErrorKind::InvalidArgument, "no rounds left for parameter estimation (m = 0)");
}

double pe_radius(double eps_pe, int sigma_card, double m) {
  require_unit_open(eps_pe, "eps_PE");
  if (sigma_card < 0) throw Error(ErrorKind::InvalidArgument, "pe_radius: |Sigma| must be non-negative");
  if (!(m >= 1.0)) throw Error(ErrorKind::InvalidArgument, "pe_radius: m must be at least 1");
  return std::sqrt(2.0) * std::sqrt((std::log(1.0 / eps_pe) + sigma_card * std::log(m + 1.0)) / m);
}

double ec_leakage(double n, double f_ec, double h_zy) {
  if (!(n >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ec_leakage: n must be non-negative");
  if (!(h_zy >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ec_leakage: h_zy must be non-negative");
  return n * f_ec * h_zy;
}

double g_alpha(double alpha, const SecurityParams& sp, double lambda_ec) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    std::ostringstream os;
    os << "g_alpha: alpha = " << alpha << " outside (1, 2]";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  sp.validate();
  return alpha / (alpha - 1.0) * std::log2(1.0 / sp.eps_pa) + lambda_ec + std::log2(1.0 / sp.eps_ev) - 2.0;
}

KeyRateReport key_length(double min_f, const FiniteSizeParams& fp, const SecurityParams& sp, double alpha,
                         double h_zy, double sifted_fraction) {
  fp.validate();
  if (!(sifted_fraction >= 0.0 && sifted_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "key_length: sifted fraction must lie in [0, 1]");
  }
  KeyRateReport r;
  r.alpha = alpha;
  r.beta = 1.0 / alpha;
  r.n_total = fp.n_total;
  r.p_gen = fp.p_gen;
  r.min_f = min_f;
  r.lambda_ec = ec_leakage(fp.n_key() * sifted_fraction, fp.f_ec, h_zy);
  r.g_alpha = g_alpha(alpha, sp, r.lambda_ec);
  r.key_length = min_f * fp.n_key() - r.g_alpha;
  r.key_rate = std::max(r.key_length, 0.0) / static_cast<double>(fp.n_total);
  return r;
}

}  // namespace renyikey
