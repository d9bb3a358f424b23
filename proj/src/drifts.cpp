#include "fbmb/drifts.hpp"

#include <cmath>
#include <stdexcept>

#include "fbmb/special.hpp"

namespace fbmb::drifts {

SampledFunction example51_phi(const TimeGrid& grid, double gamma, frac::HurstParam H) {
  if (!(H.value() > 0.5)) throw std::invalid_argument("example51 requires H > 1/2");
  SampledFunction phi(grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid.node(i);
    phi.values[i] = gamma * std::pow(t, 0.5 - H.value()) * std::exp(-t);
  }
  return phi;  // singular at 0 with exponent 1/2 - H; node 0 stores 0
}

rkhs::Drift example51(const TimeGrid& grid, double gamma, frac::HurstParam H) {
  SampledFunction phi = example51_phi(grid, gamma, H);
  const double p_phi = 0.5 - H.value();
  SampledFunction fp = frac::weighted_operator(phi, H, frac::WeightedKind::K0p, p_phi);
  if (!std::isfinite(fp.values[0])) fp.values[0] = 0.0;
  return rkhs::make_drift(std::move(fp), 0.0, "example51");
}

SampledFunction example52_phi(const TimeGrid& grid, double gamma, frac::HurstParam H) {
  if (!(H.value() < 0.5)) throw std::invalid_argument("example52 requires H < 1/2");
  SampledFunction phi(grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid.node(i);
    phi.values[i] = gamma * std::pow(t, H.value() - 0.5) * std::exp(-t);
  }
  return phi;
}

rkhs::Drift example52(const TimeGrid& grid, double gamma, frac::HurstParam H) {
  const double h = H.value();
  if (!(h < 0.5)) throw std::invalid_argument("example52 requires H < 1/2");
  const double c2 = frac::constants(H).c2;

  // G = Gamma(H+1/2) * I_{0+}^{H+1/2} e^{-u}
  SampledFunction expf(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) expf.values[i] = std::exp(-grid.node(i));
  SampledFunction G = frac::frac_integral(expf, h + 0.5, frac::IntegralSide::left_0);
  const double gfac = special::gamma_fn(h + 0.5);

  SampledFunction fp(grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid.node(i);
    fp.values[i] = gamma * c2 *
                   (std::pow(t, 2.0 * h - 1.0) - std::pow(t, h - 0.5) * gfac * G.values[i]);
  }
  return rkhs::make_drift(std::move(fp), 2.0 * h - 1.0, "example52");
}

}  // namespace fbmb::drifts
