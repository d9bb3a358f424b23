#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbmb/fbm_mc.hpp"
#include "fbmb/majorant.hpp"

namespace fbmb::bounds {

double normal_cdf(double x);
double normal_quantile(double p);

struct LemmaBounds {
  double alpha = 0.0;      // quantile of the drift-free probability
  double abs_bound = 0.0;  // |P_f - P_0| <= norm_f / sqrt(2 pi)
  double lower = 0.0;      // Phi(alpha - norm_g)
  double upper = 0.0;      // Phi(alpha + norm_f)
};

/// Gaussian shift bracket around P0 for a drift of the given norm, with a
/// dominating element of norm norm_g (callers normally pass the norm of the
/// min-norm solution).
LemmaBounds lemma_bounds(double P0, double norm_f, double norm_g);

struct StieltjesTerms {
  double int_u = 0.0;
  double int_u_tail = 0.0;
  std::optional<double> int_u_minus;
  double int_u_minus_tail = 0.0;
  double h_tilde_norm_sq = 0.0;
};

struct TheoremBounds {
  double upper = 0.0;
  bool upper_void = false;   // admissibility conditions failed, value indicative only
  std::optional<double> lower;
  bool lower_void = false;
  StieltjesTerms terms;
  std::string notes;
};

/// Exponential-shift bounds built from the majorant bundle. p_residual is the
/// estimate of P with drift f - f_hat (or the conservative value 1);
/// p_channel the two-sided channel probability when u_minus is supplied.
TheoremBounds theorem_bounds(const majorant::MajorantBundle& bundle, const mc::Boundary& b,
                             double p_residual, std::optional<double> p_channel);

struct SweepRow {
  double gamma = 0.0;
  double neg_log_p = 0.0;
  double target = 0.0;  // gamma^2 |h~|^2 / 2
  double ratio = 0.0;
  double ess = 0.0;
  std::uint64_t seed = 0;
  std::string flag;  // "ok", "baseline" or "UNRESOLVED"
};

/// Log-scale decay of P_{gamma f} against the quadratic target, one row per
/// gamma, importance sampled with tilt gamma * f_hat. A gamma = 0 baseline
/// row is always emitted first.
std::vector<SweepRow> asymptotic_sweep(const rkhs::Drift& f, const mc::Boundary& b,
                                       frac::HurstParam H, const TimeGrid& grid,
                                       const std::vector<double>& gammas, std::size_t m,
                                       std::uint64_t seed);

struct MinNormResult {
  double norm = 0.0;  // |h~|, the attained minimum
  rkhs::Drift solution;
  bool valid = false;          // admissibility conditions all pass
  double identity_residual = 0.0;  // | |f_hat|_H - |h~| | / |h~|
};

MinNormResult min_norm(const rkhs::Drift& f, frac::HurstParam H);

/// Everything cmd_bounds reports, serializable as flat key = value text.
struct BoundReport {
  double H = 0.0, T = 0.0;
  std::size_t n = 0, m = 0;
  std::uint64_t seed = 0;
  std::string drift_name;
  double gamma = 1.0;

  double norm_f = 0.0, norm_h_tilde = 0.0, norm_diff = 0.0, norm_tail = 0.0;
  double pythagoras_residual = 0.0;
  bool conditions_ok = false;
  std::string condition_summary;

  double p0_hat = 0.0, p0_se = 0.0;
  double pf_hat = 0.0, pf_se = 0.0;
  double alpha = 0.0, lemma_abs_bound = 0.0, lemma_lower = 0.0, lemma_upper = 0.0;
  double theorem_upper = 0.0;
  bool theorem_upper_void = false;
  std::optional<double> theorem_lower;
  bool theorem_lower_void = false;
  double int_u = 0.0, int_u_tail = 0.0;
  std::optional<double> int_u_minus;
  double p_residual = 1.0, p_channel = 0.0;
  std::string notes;
};

std::string serialize_report(const BoundReport& r, const std::string& config_hash);

}  // namespace fbmb::bounds
