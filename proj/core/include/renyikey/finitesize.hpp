#pragma once

// Finite-size key length: parameter-estimation radius, error-correction leakage,
// the privacy-amplification penalty g(alpha) and the resulting key rate.

#include <cstdint>
#include <string>

namespace renyikey {

struct SecurityParams {
  double eps_pa = 1e-10;
  double eps_ev = 1e-10;
  double eps_pe = 1e-10;

  double total() const { return eps_pa + eps_ev + eps_pe; }
  void validate() const;
};

struct FiniteSizeParams {
  std::int64_t n_total = 100000;  // N
  double p_gen = 0.9;
  double f_ec = 1.16;

  /// Rounds used for parameter estimation, round((1 - p_gen) N).
  std::int64_t m() const;
  /// Key-generation rounds p_gen N.
  double n_key() const;
  void validate() const;
};

/// mu = sqrt(2) sqrt((ln(1/eps_PE) + |Sigma| ln(m + 1)) / m).
double pe_radius(double eps_pe, int sigma_card, double m);

/// lambda_EC = n f_EC h_zy.
double ec_leakage(double n, double f_ec, double h_zy);

/// g(alpha) = alpha/(alpha-1) log2(1/eps_PA) + lambda_EC + log2(1/eps_EV) - 2.
double g_alpha(double alpha, const SecurityParams& sp, double lambda_ec);

struct KeyRateReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::int64_t n_total = 0;
  double p_gen = 0.0;
  double depolarization = 0.0;
  double loss = 0.0;
  double min_f = 0.0;  // certified lower bound, bits per round
  double lambda_ec = 0.0;
  double g_alpha = 0.0;
  double key_length = 0.0;
  double key_rate = 0.0;
  int fw_iters = 0;
  double fw_gap = 0.0;
  double dual_residual = 0.0;

  // Diagnostics.
  double mu_ball = 0.0;
  double fw_value = 0.0;
  double sdp_gap = 0.0;
  /// f(rho_hat) at eps_perturb minus f(rho_hat) at eps_perturb / 10.
  double perturbation_shift = 0.0;
  bool fw_converged = false;
  bool certified = false;
  std::string status;  // "converged", "not_converged", "infeasible", "solver_failure"
  std::string message;
};

/// l = min_f p_gen N - g(alpha) with lambda_EC = (p_gen N sifted_fraction) f_EC h_zy.
/// `sifted_fraction` is the share of key rounds that survive sifting and detection.
KeyRateReport key_length(double min_f, const FiniteSizeParams& fp, const SecurityParams& sp, double alpha,
                         double h_zy, double sifted_fraction = 1.0);

}  // namespace renyikey
