#include "fbmb/frac_calc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbmb/parallel.hpp"
#include "fbmb/special.hpp"

namespace fbmb::frac {

using special::beta_fn;
using special::gamma_fn;

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0) || !(h < 1.0)) {
    throw std::invalid_argument("HurstParam: H must lie in (0,1)");
  }
}

namespace detail {
double c1_fault_scale = 1.0;
}

double constant_c1(HurstParam H) {
  const double h = H.value();
  const double c =
      std::sqrt(2.0 * h * gamma_fn(h + 0.5) * gamma_fn(1.5 - h) / gamma_fn(2.0 - 2.0 * h));
  return c * detail::c1_fault_scale;
}

Constants constants(HurstParam H) {
  const double h = H.value();
  Constants c;
  c.c1 = constant_c1(H);
  c.c2 = c.c1 / gamma_fn(h + 0.5);
  if (h > 0.5) {
    c.c3 = c.c2 * beta_fn(1.5 - h, h - 0.5);
    c.has_c3 = true;
  }
  if (h < 0.5) {
    c.c4 = (0.5 - h) * beta_fn(h + 0.5, 0.5 - h);
    c.has_c4 = true;
  }
  return c;
}

double molchan_constant(HurstParam H) {
  const double h = H.value();
  return std::sqrt(gamma_fn(3.0 - 2.0 * h) /
                   (2.0 * h * std::pow(gamma_fn(1.5 - h), 3) * gamma_fn(h + 0.5)));
}

namespace {

// Exact moments of the kernel power over a cell in the distance variable:
//   pow0 = int_a^b w^{nu-1} dw,  pow1 = int_a^b w^nu dw,  0 <= a < b.
inline double pow0(double wa_pow, double wb_pow, double nu) { return (wb_pow - wa_pow) / nu; }

struct CellPowers {
  double p0, p1;
};
inline CellPowers cell_powers(double a, double b, double nu) {
  const double bp = std::pow(b, nu);
  const double ap = (a > 0.0) ? std::pow(a, nu) : 0.0;
  return {pow0(ap, bp, nu), (b * bp - a * ap) / (nu + 1.0)};
}

// Two-term local model of a power-singular function at the origin,
// g(u) ~ c0 u^p + c1 u^{p+1}, coefficients matched at the first two nodes.
struct OriginModel {
  double c0, c1, p;
};
OriginModel origin_model(const std::vector<double>& g, const TimeGrid& grid, double p) {
  const double t1 = grid.node(1);
  const double r1 = g[1] / std::pow(t1, p);
  if (grid.size() < 3) return {r1, 0.0, p};
  const double r2 = g[2] / std::pow(grid.node(2), p);
  return {2.0 * r1 - r2, (r2 - r1) / t1, p};
}

// int over [0, t1] of (c0 u^p + c1 u^{p+1}) (t - u)^{alpha-1} for an
// evaluation point t > t1: geometric subdivision toward u = 0, the kernel is
// linearized on each piece (it is smooth there).
double first_cell_singular(double t, double t1, const OriginModel& om, double alpha) {
  const int levels = 28;
  const double p = om.p;
  double total = 0.0;
  double b = t1;
  double kb = std::pow(t - b, alpha - 1.0);
  for (int k = 0; k < levels; ++k) {
    const double a = b * 0.5;
    const double ka = std::pow(t - a, alpha - 1.0);
    const double slope = (kb - ka) / (b - a);
    const double intercept = ka - slope * a;
    const double m0 = (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
    const double m1 = (std::pow(b, p + 2.0) - std::pow(a, p + 2.0)) / (p + 2.0);
    const double m2 = (std::pow(b, p + 3.0) - std::pow(a, p + 3.0)) / (p + 3.0);
    total += om.c0 * (intercept * m0 + slope * m1) + om.c1 * (intercept * m1 + slope * m2);
    b = a;
    kb = ka;
  }
  // innermost sliver [0, b]: kernel is flat to machine precision there
  total += kb * (om.c0 * std::pow(b, p + 1.0) / (p + 1.0) +
                 om.c1 * std::pow(b, p + 2.0) / (p + 2.0));
  return total;
}

// Full integral for an output node close to the origin, where the u^p
// singularity and the kernel singularity share the same few cells: the
// regular factor r = g u^{-p} is taken piecewise linear on the grid and the
// two power factors are integrated exactly on pieces refined geometrically
// toward their respective endpoints.
double small_t_singular_eval(const std::vector<double>& g, const TimeGrid& grid, double alpha,
                             const OriginModel& om, std::size_t i) {
  const double t = grid.node(i);
  const double dt = grid.dt();
  const double p = om.p;
  const std::size_t last = grid.size() - 1;
  auto r_at = [&](double u) {
    std::size_t k = std::min(static_cast<std::size_t>(u / dt), last - 1);
    const double ra = (k == 0) ? om.c0 + om.c1 * 0.0 : g[k] * std::pow(grid.node(k), -p);
    const double rb = g[k + 1] * std::pow(grid.node(k + 1), -p);
    const double w = u / dt - static_cast<double>(k);
    return ra + (rb - ra) * w;
  };
  const int levels = 26, sub = 8;
  const double half = 0.5 * t;
  double total = 0.0;
  {  // [0, t/2]: exact u^p moments, smooth remainder linearized
    double b = half;
    double psi_b = r_at(b) * std::pow(t - b, alpha - 1.0);
    for (int k = 0; k < levels; ++k) {
      const double lo = 0.5 * b;
      const double step = (b - lo) / sub;
      for (int q = 0; q < sub; ++q) {
        const double a = b - step;
        const double psi_a = r_at(a) * std::pow(t - a, alpha - 1.0);
        const double slope = (psi_b - psi_a) / step;
        const double icpt = psi_a - slope * a;
        const double m0 = (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
        const double m1 = (std::pow(b, p + 2.0) - std::pow(a, p + 2.0)) / (p + 2.0);
        total += icpt * m0 + slope * m1;
        b = a;
        psi_b = psi_a;
      }
    }
    total += psi_b * std::pow(b, p + 1.0) / (p + 1.0);
  }
  {  // [t/2, t]: exact kernel moments, smooth remainder linearized
    double wb = half;  // distance from t
    double chi_b = r_at(t - wb) * std::pow(t - wb, p);
    for (int k = 0; k < levels; ++k) {
      const double lo = 0.5 * wb;
      const double step = (wb - lo) / sub;
      for (int q = 0; q < sub; ++q) {
        const double wa = wb - step;
        const double chi_a = r_at(t - wa) * std::pow(t - wa, p);
        const double slope = (chi_b - chi_a) / step;
        const double icpt = chi_a - slope * wa;
        const double m0 = (std::pow(wb, alpha) - std::pow(wa, alpha)) / alpha;
        const double m1 = (std::pow(wb, alpha + 1.0) - std::pow(wa, alpha + 1.0)) / (alpha + 1.0);
        total += icpt * m0 + slope * m1;
        wb = wa;
        chi_b = chi_a;
      }
    }
    total += chi_b * std::pow(wb, alpha) / alpha;
  }
  return total;
}

// Left-sided core: J(t_i) = int_0^{t_i} (t_i - u)^{alpha-1} g(u) du with g
// piecewise linear between nodes and g ~ c*u^p on the first cell. Near the
// origin the u^p factor is integrated exactly (the rest of the integrand is
// linearized); near u = t the kernel power is integrated exactly instead.
void left_core(const std::vector<double>& g, const TimeGrid& grid, double alpha, double p,
               std::vector<double>& out) {
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  const double t1 = grid.node(1);
  out.assign(n, 0.0);
  const bool singular = (p != 0.0);

  fbmb::detail::parallel_for(n, [&](std::size_t i) {
    if (i == 0) return;  // empty integral
    const double t = grid.node(i);
    double acc = 0.0;
    std::size_t j0 = 0;
    if (singular) {
      const OriginModel om = origin_model(g, grid, p);
      if (i == 1) {
        out[i] = om.c0 * std::pow(t1, p + alpha) * beta_fn(p + 1.0, alpha) +
                 om.c1 * std::pow(t1, p + 1.0 + alpha) * beta_fn(p + 2.0, alpha);
        return;
      }
      if (i <= 48) {
        out[i] = small_t_singular_eval(g, grid, alpha, om, i);
        return;
      }
      acc += first_cell_singular(t, t1, om, alpha);
      j0 = 1;
      // origin-side cells: psi = g u^{-p} (t-u)^{alpha-1} is smooth there
      while (j0 + 1 < i && grid.node(j0 + 1) * 2.0 <= t && j0 < 64) {
        const double a = grid.node(j0), b = grid.node(j0 + 1);
        const double psi_a = g[j0] * std::pow(a, -p) * std::pow(t - a, alpha - 1.0);
        const double psi_b = g[j0 + 1] * std::pow(b, -p) * std::pow(t - b, alpha - 1.0);
        const double slope = (psi_b - psi_a) / dt;
        const double icpt = psi_a - slope * a;
        const double m0 = (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
        const double m1 = (std::pow(b, p + 2.0) - std::pow(a, p + 2.0)) / (p + 2.0);
        acc += icpt * m0 + slope * m1;
        ++j0;
      }
    }
    // remaining cells: w = t - u decreases from wa to wb across the cell
    double wa = t - grid.node(j0);
    double wa_pow = (wa > 0.0) ? std::pow(wa, alpha) : 0.0;
    for (std::size_t j = j0; j < i; ++j) {
      const double wb = t - grid.node(j + 1);
      const double wb_pow = (wb > 0.0) ? std::pow(wb, alpha) : 0.0;
      const double slope = (g[j + 1] - g[j]) / dt;
      const double at_t = g[j] + slope * wa;  // linear extension of g at u = t
      const double p0 = (wa_pow - wb_pow) / alpha;
      const double p1 = (wa * wa_pow - wb * wb_pow) / (alpha + 1.0);
      acc += at_t * p0 - slope * p1;
      wa = wb;
      wa_pow = wb_pow;
    }
    out[i] = acc;
  });
}

// Right-sided core: J(t_i) = int_{t_i}^{T} (u - t_i)^{alpha-1} g(u) du.
void right_core(const std::vector<double>& g, const TimeGrid& grid, double alpha, double p,
                std::vector<double>& out) {
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  out.assign(n, 0.0);

  fbmb::detail::parallel_for(n, [&](std::size_t i) {
    const double t = grid.node(i);
    double acc = 0.0;
    std::size_t j0 = i;
    if (i == 0 && p != 0.0) {
      // kernel u^{alpha-1} against the origin model on [0, t1]; when the
      // combined exponent is not integrable the value at t = 0 diverges and
      // the first cell is left out (callers extrapolate node 0)
      const double t1 = grid.node(1);
      if (alpha + p > 0.0) {
        const OriginModel om = origin_model(g, grid, p);
        acc += om.c0 * std::pow(t1, alpha + p) / (alpha + p) +
               om.c1 * std::pow(t1, alpha + p + 1.0) / (alpha + p + 1.0);
      }
      j0 = 1;
    }
    double wa = grid.node(j0) - t;
    double wa_pow = (wa > 0.0) ? std::pow(wa, alpha) : 0.0;
    for (std::size_t j = j0; j + 1 < n; ++j) {
      const double wb = grid.node(j + 1) - t;
      const double wb_pow = std::pow(wb, alpha);
      const double slope = (g[j + 1] - g[j]) / dt;
      const double at_t = g[j] - slope * wa;  // linear extension of g at u = t
      const double p0 = (wb_pow - wa_pow) / alpha;
      const double p1 = (wb * wb_pow - wa * wa_pow) / (alpha + 1.0);
      acc += at_t * p0 + slope * p1;
      wa = wb;
      wa_pow = wb_pow;
    }
    out[i] = acc;
  });
}

void estimate_weyl_tail(const std::vector<double>& g, const TimeGrid& grid, double alpha,
                        TailReport* tail) {
  if (tail == nullptr) return;
  *tail = TailReport{};
  const std::size_t n = grid.size();
  const std::size_t i0 = (n > 10) ? n - 1 - n / 10 : 0;
  const double gT = std::fabs(g[n - 1]);
  const double g0 = std::fabs(g[i0]);
  if (gT == 0.0) return;  // nothing left at the horizon
  if (i0 == n - 1 || g0 <= gT) {
    tail->warning = true;  // not decaying over the last decade
    tail->remainder = gT * grid.horizon();
    return;
  }
  const double lambda = std::log(g0 / gT) / (grid.horizon() - grid.node(i0));
  // bound for evaluation points t <= T/2: (u-t)^{alpha-1} <= (T/2)^{alpha-1}
  const double kf = (alpha < 1.0) ? std::pow(0.5 * grid.horizon(), alpha - 1.0)
                                  : std::pow(1.5 * grid.horizon(), alpha - 1.0);
  tail->remainder = gT * kf / lambda;
}

std::vector<double> central_derivative(const std::vector<double>& F, double dt) {
  const std::size_t n = F.size();
  if (n < 3) throw std::invalid_argument("derivative: need at least 3 nodes");
  std::vector<double> d(n);
  d[0] = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * dt);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (F[i + 1] - F[i - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * F[n - 1] - 4.0 * F[n - 2] + F[n - 3]) / (2.0 * dt);
  return d;
}

}  // namespace

SampledFunction frac_integral(const SampledFunction& f, double alpha, IntegralSide side,
                              double p, TailReport* tail) {
  require_finite(f, "frac_integral");
  if (!(alpha > 0.0)) throw std::invalid_argument("frac_integral: order must be positive");
  if (!(alpha < 2.0)) throw std::invalid_argument("frac_integral: orders >= 2 unsupported");
  if (!(p > -1.0)) {
    throw std::invalid_argument("frac_integral: singularity exponent must be > -1, got " +
                                std::to_string(p));
  }
  std::vector<double> core;
  if (side == IntegralSide::left_0) {
    left_core(f.values, f.grid, alpha, p, core);
  } else {
    right_core(f.values, f.grid, alpha, p, core);
    if (side == IntegralSide::weyl) estimate_weyl_tail(f.values, f.grid, alpha, tail);
  }
  const double inv_gamma = 1.0 / gamma_fn(alpha);
  SampledFunction out(f.grid);
  for (std::size_t i = 0; i < core.size(); ++i) out.values[i] = core[i] * inv_gamma;
  return out;
}

SampledFunction frac_derivative(const SampledFunction& f, double alpha, DerivativeSide side,
                                double p) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("frac_derivative: order must lie in (0,1)");
  }
  const bool left = (side == DerivativeSide::left_0);
  SampledFunction F = frac_integral(f, 1.0 - alpha,
                                    left ? IntegralSide::left_0 : IntegralSide::weyl, p);
  std::vector<double> d = central_derivative(F.values, f.grid.dt());
  if (left && F.size() >= 5) {
    // F(0) = 0 and F ~ c0 t^beta + c1 t^{beta+1} near the origin with
    // beta = p + 1 - alpha; symmetric differences misread the cusp for
    // beta < 2, while the matched two-term model differentiates exactly.
    const double beta = p + 1.0 - alpha;
    if (beta < 1.9) {
      const double t1 = f.grid.node(1);
      const double x = F.values[1] / std::pow(t1, beta);
      const double y = F.values[2] / std::pow(f.grid.node(2), beta);
      const double c0 = 2.0 * x - y;
      const double c1 = (y - x) / t1;
      for (std::size_t i = 1; i <= 3; ++i) {
        const double t = f.grid.node(i);
        d[i] = beta * c0 * std::pow(t, beta - 1.0) + (beta + 1.0) * c1 * std::pow(t, beta);
      }
    }
  }
  SampledFunction out(f.grid);
  const double sign = left ? 1.0 : -1.0;
  for (std::size_t i = 0; i < d.size(); ++i) out.values[i] = sign * d[i];
  return out;
}

SampledFunction weighted_operator(const SampledFunction& f, HurstParam H, WeightedKind kind,
                                  double p, TailReport* tail) {
  require_finite(f, "weighted_operator");
  if (H.is_half()) return f;  // identity by definition
  const double a = H.value() - 0.5;
  const double c1 = constant_c1(H);

  double scale = 0.0, outer = 0.0, inner = 0.0, order = 0.0;
  bool left = true;
  switch (kind) {
    case WeightedKind::K0p:       scale = c1;       outer = a;  inner = -a; order = a;  left = true;  break;
    case WeightedKind::K0p_star:  scale = 1.0 / c1; outer = a;  inner = -a; order = -a; left = true;  break;
    case WeightedKind::Kinf:      scale = c1;       outer = -a; inner = a;  order = a;  left = false; break;
    case WeightedKind::Kinf_star: scale = 1.0 / c1; outer = -a; inner = a;  order = -a; left = false; break;
  }
  const double p_inner = p + inner;
  if (!(p_inner > -1.0)) {
    throw std::invalid_argument(
        "weighted_operator: weight-adjusted function has non-integrable exponent " +
        std::to_string(p_inner) + " at the origin");
  }

  const std::size_t n = f.size();
  SampledFunction g(f.grid);
  g.values[0] = 0.0;  // singular weights handled through p_inner
  for (std::size_t i = 1; i < n; ++i) {
    g.values[i] = std::pow(f.grid.node(i), inner) * f.values[i];
  }

  SampledFunction core(f.grid);
  if (order > 0.0) {
    core = frac_integral(g, order, left ? IntegralSide::left_0 : IntegralSide::weyl, p_inner,
                         tail);
  } else {
    core = frac_derivative(g, -order, left ? DerivativeSide::left_0 : DerivativeSide::right_inf,
                           p_inner);
    if (!left && tail != nullptr) *tail = TailReport{};
  }

  SampledFunction out(f.grid);
  for (std::size_t i = 1; i < n; ++i) {
    out.values[i] = scale * std::pow(f.grid.node(i), outer) * core.values[i];
  }
  if (outer > 0.0) {
    out.values[0] = 0.0;
  } else if (n >= 3) {
    const double e = 2.0 * out.values[1] - out.values[2];
    out.values[0] = std::isfinite(e) ? e : out.values[1];
  } else {
    out.values[0] = out.values[1];
  }
  return out;
}

namespace {

// int_s^t (u-s)^expo * psi(u) du for expo in (-1,1), psi smooth on [s,t]:
// uniform product-integration pieces, the piece touching u = s refined
// geometrically.
template <typename Psi>
double singular_edge_integral(double s, double t, double expo, Psi psi) {
  const double L = t - s;
  if (!(L > 0.0)) return 0.0;
  const int pieces = 192;
  const double nu = expo + 1.0;
  const double step = L / pieces;

  double total = 0.0;
  // geometric refinement inside [s, s+step]
  {
    const int levels = 28;
    double b = step;  // distances from s
    double pb = psi(s + b);
    for (int k = 0; k < levels; ++k) {
      const double a = b * 0.5;
      const double pa = psi(s + a);
      const double slope = (pb - pa) / (b - a);
      const double intercept = pa - slope * a;
      const auto m = cell_powers(a, b, nu);
      total += intercept * m.p0 + slope * m.p1;
      b = a;
      pb = pa;
    }
    total += pb * std::pow(b, nu) / nu;  // innermost sliver, psi flat
  }
  double wa = step;
  double pa = psi(s + wa);
  double wa_pow = std::pow(wa, nu);
  for (int k = 1; k < pieces; ++k) {
    const double wb = (k + 1 == pieces) ? L : (k + 1) * step;
    const double pb = psi(s + wb);
    const double wb_pow = std::pow(wb, nu);
    const double slope = (pb - pa) / (wb - wa);
    const double intercept = pa - slope * wa;
    const double p0 = (wb_pow - wa_pow) / nu;
    const double p1 = (wb * wb_pow - wa * wa_pow) / (nu + 1.0);
    total += intercept * p0 + slope * p1;
    wa = wb;
    pa = pb;
    wa_pow = wb_pow;
  }
  return total;
}

}  // namespace

double eval_kernel(KernelKind kind, double t, double s, HurstParam H) {
  if (!(s > 0.0) || !(s < t)) {
    throw std::invalid_argument("eval_kernel: need 0 < s < t");
  }
  const double h = H.value();
  if (H.is_half()) return 1.0;  // all three kernels collapse
  const double a = h - 0.5;

  switch (kind) {
    case KernelKind::l_H:
      return molchan_constant(H) * std::pow(s, -a) * std::pow(t - s, -a);

    case KernelKind::K_H: {
      const double c1 = constant_c1(H);
      if (h > 0.5) {
        const double J = singular_edge_integral(
            s, t, h - 1.5, [&](double u) { return std::pow(u, a); });
        return c1 / gamma_fn(a) * std::pow(s, -a) * J;
      }
      const double J = singular_edge_integral(
          s, t, a, [&](double u) { return std::pow(u, h - 1.5); });
      return c1 / gamma_fn(h + 0.5) *
             (std::pow(t / s, a) * std::pow(t - s, a) - a * std::pow(s, -a) * J);
    }

    case KernelKind::K_H_star: {
      const double c1 = constant_c1(H);
      if (h < 0.5) {
        const double J = singular_edge_integral(
            s, t, -h - 0.5, [&](double u) { return std::pow(u, a); });
        return std::pow(s, -a) / (c1 * gamma_fn(0.5 - h)) * J;
      }
      const double J = singular_edge_integral(
          s, t, -a, [&](double u) { return std::pow(u, h - 1.5); });
      return 1.0 / (c1 * gamma_fn(1.5 - h)) *
             (std::pow(t / s, a) * std::pow(t - s, -a) - a * std::pow(s, -a) * J);
    }
  }
  throw std::logic_error("eval_kernel: unknown kind");
}

QPrimeResult q_prime(const SampledFunction& f_prime, HurstParam H, double p) {
  require_finite(f_prime, "q_prime");
  if (!(p > -1.0)) {
    throw std::invalid_argument("q_prime: declared singularity exponent required (> -1)");
  }
  const double h = H.value();
  const std::size_t n = f_prime.size();

  QPrimeResult res{SampledFunction(f_prime.grid), 0.0};
  SampledFunction phi = weighted_operator(f_prime, H, WeightedKind::K0p_star, p);
  const double p_phi = p + 0.5 - h;

  if (H.is_half()) {
    res.q_prime = f_prime;
  } else {
    const double a = h - 0.5;
    SampledFunction g(f_prime.grid);
    g.values[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      g.values[i] = std::pow(f_prime.grid.node(i), -a) * f_prime.values[i];
    }
    const double p_g = p - a;
    const double inv_c1 = 1.0 / constant_c1(H);
    SampledFunction core =
        (h < 0.5) ? frac_integral(g, 0.5 - h, IntegralSide::left_0, p_g)
                  : frac_derivative(g, a, DerivativeSide::left_0, p_g);
    for (std::size_t i = 0; i < n; ++i) res.q_prime.values[i] = inv_c1 * core.values[i];
  }

  // consistency of the two routes to the Wiener-drift primitive:
  // int_0^t q'(s) s^{H-1/2} ds against int_0^t phi(s) ds
  const double a = h - 0.5;
  SampledFunction integrand(f_prime.grid);
  integrand.values[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    integrand.values[i] = res.q_prime.values[i] * std::pow(f_prime.grid.node(i), a);
  }
  if (!std::isfinite(res.q_prime.values[0])) res.q_prime.values[0] = 0.0;
  const SampledFunction A = cumulative_integral(integrand, std::max(p_phi, -0.9));
  const SampledFunction B = cumulative_integral(phi, std::max(p_phi, -0.9));
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max(scale, std::fabs(B.values[i]));
    worst = std::max(worst, std::fabs(A.values[i] - B.values[i]));
  }
  res.identity_residual = (scale > 0.0) ? worst / scale : worst;
  return res;
}

}  // namespace fbmb::frac
