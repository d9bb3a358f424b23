#include "fbmb/rkhs.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmb::rkhs {

Drift make_drift(SampledFunction f_prime, double p, std::string name) {
  require_finite(f_prime, "Drift");
  if (!(p > -1.0)) throw std::invalid_argument("Drift: singularity exponent must be > -1");
  SampledFunction f = cumulative_integral(f_prime, p);
  return Drift{std::move(f_prime), std::move(f), p, std::move(name)};
}

Drift scale_drift(const Drift& d, double gamma) {
  SampledFunction fp = d.f_prime;
  for (double& v : fp.values) v *= gamma;
  return make_drift(std::move(fp), d.singularity_exponent,
                    d.name + "*" + std::to_string(gamma));
}

double covariance(double s, double t, frac::HurstParam H) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance: arguments must be >= 0");
  const double twoH = 2.0 * H.value();
  return 0.5 * (std::pow(t, twoH) + std::pow(s, twoH) - std::pow(std::fabs(t - s), twoH));
}

namespace {
double tail_l2_estimate(const SampledFunction& phi, double p) {
  // crude exponential fit over the last decade, as a reported remainder only
  const std::size_t n = phi.size();
  const std::size_t i0 = (n > 10) ? n - 1 - n / 10 : 0;
  const double vT = std::fabs(phi.values[n - 1]);
  const double v0 = std::fabs(phi.values[i0]);
  (void)p;
  if (vT == 0.0) return 0.0;
  if (i0 == n - 1 || v0 <= vT) return vT * std::sqrt(phi.grid.horizon());
  const double lambda =
      std::log(v0 / vT) / (phi.grid.horizon() - phi.grid.node(i0));
  return std::sqrt(vT * vT / (2.0 * lambda));
}
}  // namespace

RkhsElement to_representation(const Drift& f, frac::HurstParam H) {
  SampledFunction phi =
      frac::weighted_operator(f.f_prime, H, frac::WeightedKind::K0p_star, f.singularity_exponent);
  const double p_phi = H.is_half() ? f.singularity_exponent
                                   : f.singularity_exponent + 0.5 - H.value();

  RkhsElement el{std::move(phi), 0.0, 0.0, H, f.name, 0.0, p_phi};
  el.norm = l2_norm(el.phi, std::max(p_phi, -0.49));
  el.norm_tail = tail_l2_estimate(el.phi, p_phi);

  // round-trip diagnostic: K0p phi should reproduce f'
  SampledFunction back = frac::weighted_operator(el.phi, H, frac::WeightedKind::K0p, p_phi);
  double scale = 0.0, worst = 0.0;
  const std::size_t n = back.size();
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(f.f_prime.values[i]));
  for (std::size_t i = n / 20 + 1; i < n; ++i) {
    worst = std::max(worst, std::fabs(back.values[i] - f.f_prime.values[i]));
  }
  el.roundtrip_residual = (scale > 0.0) ? worst / scale : worst;
  return el;
}

Drift reconstruct(const RkhsElement& phi) {
  SampledFunction fp =
      frac::weighted_operator(phi.phi, phi.H, frac::WeightedKind::K0p, phi.phi_singularity);
  const double p_fp = phi.H.is_half() ? phi.phi_singularity
                                      : phi.phi_singularity + phi.H.value() - 0.5;
  if (!std::isfinite(fp.values[0])) fp.values[0] = 0.0;
  return make_drift(std::move(fp), std::max(p_fp, -0.99), phi.source + "~reconstructed");
}

SampledFunction h_function(const RkhsElement& phi) {
  return cumulative_integral(phi.phi, std::max(phi.phi_singularity, -0.99));
}

}  // namespace fbmb::rkhs
