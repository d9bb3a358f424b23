#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fbmb/rkhs.hpp"

namespace fbmb::majorant {

/// Smallest concave nondecreasing majorant of node data with h(0) = 0.
/// h_tilde holds the dense samples, h_tilde_prime the right-continuous
/// slope step function (node i carries the slope on [t_i, t_{i+1})).
struct HullResult {
  std::vector<std::size_t> vertex_index;
  std::vector<double> vertex_value;
  SampledFunction h_tilde;
  SampledFunction h_tilde_prime;
};

HullResult concave_majorant(const SampledFunction& h);

struct KResult {
  SampledFunction K;
  bool nonincreasing = false;
  double max_violation = 0.0;  // largest upward step, before clamping
  double decay_proxy = 0.0;    // |K(T)| * T^H
  frac::TailReport tail;
};

/// K = Kinf_star applied to h_tilde_prime, with the monotonicity and decay
/// evidence needed by the admissibility report.
KResult k_function(const SampledFunction& h_tilde_prime, frac::HurstParam H,
                   double singularity_exponent = 0.0);

/// f_hat' = K0p h_tilde_prime; integrates to the dominating drift. When the
/// majorant coincides with h at every node the input drift is its own
/// solution and is returned unchanged.
rkhs::Drift f_hat_from_slopes(const SampledFunction& h_tilde_prime, frac::HurstParam H);

struct ConditionTolerances {
  double decay_eps = 1e-3;        // bound on |K(T)| T^H
  double phi_tail_rel = 5e-2;     // allowed tail share of the representation norm
  double roundtrip_rel = 5e-2;    // allowed defect in h~' = K0p_star f_hat'
};

struct ConditionReport {
  bool i_ok = false;
  bool ii_ok = false;
  bool iii_ok = false;

  double phi_norm = 0.0;
  double phi_tail = 0.0;
  double k_max_violation = 0.0;
  double k_decay_proxy = 0.0;
  double l2h_proxy_norm = 0.0;       // norm of Kinf |K|, finite <=> membership proxy
  double ltilde_at_half = 0.0;       // H < 1/2 tail functional at T/2 ...
  double ltilde_at_full = 0.0;       // ... and at T, expected smaller
  double roundtrip_residual = 0.0;
  double fhat_min_gap = 0.0;         // min over nodes of f_hat - f
  bool fhat_geq_f = false;

  bool all() const { return i_ok && ii_ok && iii_ok; }
  std::string summary() const;
};

struct MajorantBundle {
  rkhs::RkhsElement rep;
  SampledFunction h;
  HullResult hull;
  KResult k;
  rkhs::Drift f_hat;
  bool f_hat_is_input = false;

  double norm_h = 0.0;        // = rep.norm
  double norm_h_tilde = 0.0;
  double norm_diff = 0.0;
  double pythagoras_residual = 0.0;  // norm_h^2 - norm_h_tilde^2 - norm_diff^2
  double f_hat_norm = 0.0;           // RKHS norm of f_hat, recomputed independently

  ConditionReport report;
};

MajorantBundle build_bundle(const rkhs::Drift& f, frac::HurstParam H,
                            const ConditionTolerances& tol = {});

/// Multi-column CSV: t,h,h_tilde,h_tilde_prime,K,f_hat
void write_bundle_csv(const MajorantBundle& b, const std::string& path);

}  // namespace fbmb::majorant
