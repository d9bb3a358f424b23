#include "fbmb/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fbmb/special.hpp"

namespace fbmb::bounds {

double normal_cdf(double x) { return special::normal_cdf(x); }
double normal_quantile(double p) { return special::normal_quantile(p); }

LemmaBounds lemma_bounds(double P0, double norm_f, double norm_g) {
  if (!(P0 > 0.0) || !(P0 < 1.0)) {
    throw std::invalid_argument("lemma_bounds: P0 must lie in (0,1)");
  }
  if (norm_f < 0.0 || norm_g < 0.0) {
    throw std::invalid_argument("lemma_bounds: norms must be nonnegative");
  }
  LemmaBounds r;
  r.alpha = normal_quantile(P0);
  r.abs_bound = norm_f / std::sqrt(2.0 * M_PI);
  r.lower = normal_cdf(r.alpha - norm_g);
  r.upper = normal_cdf(r.alpha + norm_f);
  return r;
}

TheoremBounds theorem_bounds(const majorant::MajorantBundle& bundle, const mc::Boundary& b,
                             double p_residual, std::optional<double> p_channel) {
  TheoremBounds r;
  const double ht2 = bundle.norm_h_tilde * bundle.norm_h_tilde;
  r.terms.h_tilde_norm_sq = ht2;
  const bool conditions = bundle.report.all();

  StieltjesResult su;
  try {
    su = stieltjes_vs_decreasing(b.u, bundle.k.K);
  } catch (const std::exception& e) {
    r.upper = std::nan("");
    r.upper_void = true;
    r.notes += std::string("upper: ") + e.what() + "; ";
    return r;
  }
  r.terms.int_u = su.value;
  r.terms.int_u_tail = su.tail_bound;
  r.upper = p_residual * std::exp(su.value - 0.5 * ht2);
  r.upper_void = !conditions;

  if (b.u_minus && p_channel) {
    const double h = bundle.rep.H.value();
    if (h < 0.5 && !bundle.report.fhat_geq_f) {
      r.lower_void = true;
      r.notes += "lower: refused, f_hat >= f fails at gap " +
                 std::to_string(bundle.report.fhat_min_gap) + "; ";
    } else {
      const StieltjesResult sm = stieltjes_vs_decreasing(*b.u_minus, bundle.k.K);
      r.terms.int_u_minus = sm.value;
      r.terms.int_u_minus_tail = sm.tail_bound;
      const double v = *p_channel * std::exp(sm.value - 0.5 * ht2);
      r.lower = v;
      r.lower_void = !conditions;
      if (v == 0.0) r.notes += "lower: degenerate (channel or exponent vanished); ";
    }
  }
  return r;
}

std::vector<SweepRow> asymptotic_sweep(const rkhs::Drift& f, const mc::Boundary& b,
                                       frac::HurstParam H, const TimeGrid& grid,
                                       const std::vector<double>& gammas, std::size_t m,
                                       std::uint64_t seed) {
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    if (!(gammas[i] > gammas[i - 1])) {
      throw std::invalid_argument("asymptotic_sweep: gammas must be positive increasing");
    }
  }
  if (!gammas.empty() && !(gammas.front() > 0.0)) {
    throw std::invalid_argument("asymptotic_sweep: gammas must be positive");
  }
  bool positive_somewhere = false;
  for (double v : f.f.values) positive_somewhere = positive_somewhere || (v > 0.0);
  if (!positive_somewhere) {
    throw std::invalid_argument("asymptotic_sweep: drift is nowhere positive");
  }

  majorant::MajorantBundle bundle = majorant::build_bundle(f, H);
  const double ht2 = bundle.norm_h_tilde * bundle.norm_h_tilde;
  rkhs::RkhsElement fhat_rep = bundle.f_hat_is_input
                                   ? bundle.rep
                                   : rkhs::to_representation(bundle.f_hat, H);

  std::vector<SweepRow> rows;
  {
    SweepRow base;
    base.gamma = 0.0;
    base.seed = seed;
    mc::EstimatorResult p0 = mc::estimate_P(rkhs::scale_drift(f, 0.0), b, H, grid, m, seed,
                                            mc::Method::volterra);
    base.neg_log_p = (p0.estimate > 0.0) ? -std::log(p0.estimate) : std::nan("");
    base.target = 0.0;
    base.ratio = std::nan("");
    base.ess = p0.ess;
    base.flag = "baseline";
    rows.push_back(base);
  }

  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const double g = gammas[k];
    SweepRow row;
    row.gamma = g;
    row.seed = seed + 1 + k;
    row.target = 0.5 * g * g * ht2;

    rkhs::Drift fg = rkhs::scale_drift(f, g);
    rkhs::RkhsElement tilt = fhat_rep;
    for (double& v : tilt.phi.values) v *= g;
    tilt.norm *= g;

    mc::EstimatorResult est = mc::estimate_P_girsanov(fg, b, H, grid, m, row.seed, tilt);
    row.ess = est.ess;
    if (est.estimate > 0.0) {
      row.neg_log_p = -std::log(est.estimate);
      row.ratio = row.neg_log_p / row.target;
      row.flag = "ok";
    } else {
      row.neg_log_p = std::nan("");
      row.ratio = std::nan("");
      row.flag = "UNRESOLVED";
    }
    rows.push_back(row);
  }
  return rows;
}

MinNormResult min_norm(const rkhs::Drift& f, frac::HurstParam H) {
  majorant::MajorantBundle b = majorant::build_bundle(f, H);
  MinNormResult r{b.norm_h_tilde, b.f_hat, b.report.all(), 0.0};
  if (b.norm_h_tilde > 0.0) {
    r.identity_residual = std::fabs(b.f_hat_norm - b.norm_h_tilde) / b.norm_h_tilde;
  }
  return r;
}

namespace {
void put_kv(std::string& out, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
  out += buf;
}
void put_kv(std::string& out, const char* key, const std::string& v) {
  out += key;
  out += " = ";
  out += v;
  out += '\n';
}
}  // namespace

std::string serialize_report(const BoundReport& r, const std::string& config_hash) {
  std::string s;
  put_kv(s, "config_hash", config_hash);
  put_kv(s, "drift", r.drift_name);
  put_kv(s, "H", r.H);
  put_kv(s, "T", r.T);
  put_kv(s, "n", static_cast<double>(r.n));
  put_kv(s, "m", static_cast<double>(r.m));
  put_kv(s, "seed", static_cast<double>(r.seed));
  put_kv(s, "gamma", r.gamma);
  put_kv(s, "norm_f", r.norm_f);
  put_kv(s, "norm_f_tail", r.norm_tail);
  put_kv(s, "norm_h_tilde", r.norm_h_tilde);
  put_kv(s, "norm_h_minus_h_tilde", r.norm_diff);
  put_kv(s, "pythagoras_residual", r.pythagoras_residual);
  put_kv(s, "conditions_ok", r.conditions_ok ? std::string("true") : std::string("false"));
  put_kv(s, "conditions", r.condition_summary);
  put_kv(s, "p0_hat", r.p0_hat);
  put_kv(s, "p0_se", r.p0_se);
  put_kv(s, "pf_hat", r.pf_hat);
  put_kv(s, "pf_se", r.pf_se);
  put_kv(s, "alpha", r.alpha);
  put_kv(s, "lemma_abs_bound", r.lemma_abs_bound);
  put_kv(s, "lemma_lower", r.lemma_lower);
  put_kv(s, "lemma_upper", r.lemma_upper);
  put_kv(s, "stieltjes_int_u", r.int_u);
  put_kv(s, "stieltjes_int_u_tail", r.int_u_tail);
  if (r.int_u_minus) put_kv(s, "stieltjes_int_u_minus", *r.int_u_minus);
  put_kv(s, "p_residual", r.p_residual);
  put_kv(s, "p_channel", r.p_channel);
  put_kv(s, "theorem_upper", r.theorem_upper);
  put_kv(s, "theorem_upper_void",
         r.theorem_upper_void ? std::string("true") : std::string("false"));
  if (r.theorem_lower) {
    put_kv(s, "theorem_lower", *r.theorem_lower);
    put_kv(s, "theorem_lower_void",
           r.theorem_lower_void ? std::string("true") : std::string("false"));
  }
  if (!r.notes.empty()) put_kv(s, "notes", r.notes);
  return s;
}

}  // namespace fbmb::bounds
