#include "fbmb/majorant.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbmb::majorant {

HullResult concave_majorant(const SampledFunction& h) {
  require_finite(h, "concave_majorant");
  const std::size_t n = h.size();
  double scale = 0.0;
  for (double v : h.values) scale = std::max(scale, std::fabs(v));
  if (std::fabs(h.values[0]) > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("concave_majorant: h(0) must be 0");
  }

  // upper hull, slopes strictly decreasing; index arithmetic keeps the scan
  // exactly scale-equivariant in h
  std::vector<std::size_t> st;
  st.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (st.size() >= 2) {
      const std::size_t a = st[st.size() - 2], b = st[st.size() - 1];
      const double cross = (h.values[i] - h.values[a]) * static_cast<double>(b - a) -
                           (h.values[b] - h.values[a]) * static_cast<double>(i - a);
      if (cross >= 0.0) {
        st.pop_back();  // b below or on the chord a--i
      } else {
        break;
      }
    }
    st.push_back(i);
  }

  // enforce nondecreasing: slopes are sorted, so negative ones form a
  // suffix; flatten it at the running maximum level
  std::size_t peak = 0;
  for (std::size_t k = 1; k < st.size(); ++k) {
    if (h.values[st[k]] < h.values[st[peak]]) break;  // first decrease
    peak = k;
  }
  std::vector<std::size_t> vid(st.begin(), st.begin() + peak + 1);
  std::vector<double> vval;
  vval.reserve(vid.size() + 1);
  for (std::size_t k : vid) vval.push_back(h.values[k]);
  if (vid.back() != n - 1) {
    vid.push_back(n - 1);
    vval.push_back(vval.back());  // horizontal tail at the maximum
  }

  HullResult r{std::move(vid), std::move(vval), SampledFunction(h.grid),
               SampledFunction(h.grid)};
  const double dt = h.grid.dt();
  for (std::size_t k = 0; k + 1 < r.vertex_index.size(); ++k) {
    const std::size_t a = r.vertex_index[k], b = r.vertex_index[k + 1];
    double slope = (r.vertex_value[k + 1] - r.vertex_value[k]) /
                   (static_cast<double>(b - a) * dt);
    if (slope < 0.0) slope = 0.0;  // float noise on the flattened tail
    for (std::size_t i = a; i < b; ++i) {
      r.h_tilde.values[i] =
          r.vertex_value[k] + slope * (static_cast<double>(i - a) * dt);
      r.h_tilde_prime.values[i] = slope;
    }
  }
  r.h_tilde.values[n - 1] = r.vertex_value.back();
  r.h_tilde_prime.values[n - 1] = r.h_tilde_prime.values[n - 2];
  // vertices are exact by construction
  for (std::size_t k = 0; k < r.vertex_index.size(); ++k) {
    r.h_tilde.values[r.vertex_index[k]] = r.vertex_value[k];
  }
  return r;
}

KResult k_function(const SampledFunction& h_tilde_prime, frac::HurstParam H, double p) {
  KResult r{SampledFunction(h_tilde_prime.grid)};
  r.K = frac::weighted_operator(h_tilde_prime, H, frac::WeightedKind::Kinf_star, p, &r.tail);

  double kmax = 0.0;
  for (double v : r.K.values) kmax = std::max(kmax, std::fabs(v));
  const double tol = 1e-9 * kmax;
  r.max_violation = 0.0;
  for (std::size_t i = 1; i < r.K.size(); ++i) {
    const double rise = r.K.values[i] - r.K.values[i - 1];
    if (rise > 0.0) {
      r.max_violation = std::max(r.max_violation, rise);
      if (rise <= tol) r.K.values[i] = r.K.values[i - 1];  // clamp float noise
    }
  }
  r.nonincreasing = (r.max_violation <= tol);
  const double T = r.K.grid.horizon();
  r.decay_proxy = std::fabs(r.K.values[r.K.size() - 1]) * std::pow(T, H.value());
  return r;
}

rkhs::Drift f_hat_from_slopes(const SampledFunction& h_tilde_prime, frac::HurstParam H) {
  SampledFunction fp = frac::weighted_operator(h_tilde_prime, H, frac::WeightedKind::K0p);
  if (!std::isfinite(fp.values[0])) fp.values[0] = 0.0;
  const double p = H.is_half() ? 0.0 : std::max(H.value() - 0.5, 0.0);
  return rkhs::make_drift(std::move(fp), p, "f_hat");
}

namespace {

// Membership evidence for the weighted spaces entering the admissibility
// conditions; only finiteness / decrease is asserted, at grid resolution.
void l2h_evidence(const KResult& k, frac::HurstParam H, ConditionReport& rep) {
  SampledFunction absK(k.K.grid);
  for (std::size_t i = 0; i < k.K.size(); ++i) absK.values[i] = std::fabs(k.K.values[i]);
  SampledFunction img = frac::weighted_operator(absK, H, frac::WeightedKind::Kinf);
  bool finite = true;
  for (double v : img.values) finite = finite && std::isfinite(v);
  rep.l2h_proxy_norm = finite ? l2_norm(img) : std::nan("");

  if (H.value() < 0.5) {
    const auto functional = [&](double theta) {
      // int_0^theta t^{1-2H} ( int_theta^T u^{H-1/2} K(u) (u-t)^{H-3/2} du )^2 dt
      const TimeGrid& g = k.K.grid;
      const double dt = g.dt();
      std::size_t i_theta = 0;
      while (i_theta + 1 < g.size() && g.node(i_theta + 1) <= theta) ++i_theta;
      double outer = 0.0;
      for (std::size_t i = 1; i + 1 <= i_theta; ++i) {
        const double t = g.node(i);
        double inner = 0.0;
        for (std::size_t j = i_theta; j + 1 < g.size(); ++j) {
          const double u = g.node(j) + 0.5 * dt;
          const double kv = 0.5 * (k.K.values[j] + k.K.values[j + 1]);
          inner += std::pow(u, H.value() - 0.5) * kv * std::pow(u - t, H.value() - 1.5) * dt;
        }
        outer += std::pow(t, 1.0 - 2.0 * H.value()) * inner * inner * dt;
      }
      return outer;
    };
    rep.ltilde_at_half = functional(0.5 * k.K.grid.horizon());
    rep.ltilde_at_full = functional(k.K.grid.horizon());
  }
}

}  // namespace

std::string ConditionReport::summary() const {
  std::ostringstream os;
  os << "(i) " << (i_ok ? "pass" : "FAIL") << " |phi|=" << phi_norm << " tail=" << phi_tail
     << "; (ii) " << (ii_ok ? "pass" : "FAIL") << " K_violation=" << k_max_violation
     << " decay=" << k_decay_proxy << "; (iii) " << (iii_ok ? "pass" : "FAIL")
     << " roundtrip=" << roundtrip_residual;
  return os.str();
}

MajorantBundle build_bundle(const rkhs::Drift& f, frac::HurstParam H,
                            const ConditionTolerances& tol) {
  rkhs::RkhsElement representation = rkhs::to_representation(f, H);
  SampledFunction h = rkhs::h_function(representation);
  HullResult hull = concave_majorant(h);
  KResult k = k_function(hull.h_tilde_prime, H);
  MajorantBundle b{std::move(representation), std::move(h), std::move(hull), std::move(k),
                   f,       false,            0.0,          0.0,
                   0.0,     0.0,              0.0,          ConditionReport{}};

  // exact-contact test: the hull scan preserves touched node values bitwise
  bool identical = true;
  for (std::size_t i = 0; i < b.h.size() && identical; ++i) {
    identical = (b.hull.h_tilde.values[i] == b.h.values[i]);
  }
  if (identical) {
    b.f_hat = f;  // the drift solves its own majorant problem
    b.f_hat_is_input = true;
  } else {
    b.f_hat = f_hat_from_slopes(b.hull.h_tilde_prime, H);
  }

  // norms in the scheme that keeps the energy split exact on the grid:
  // cell masses of h against the piecewise-constant hull slopes
  const std::size_t n = b.h.size();
  const double dt = b.h.grid.dt();
  b.norm_h = b.rep.norm;
  double ht2 = 0.0, cross = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = b.hull.h_tilde_prime.values[i];
    ht2 += v * v * dt;
    cross += v * (b.h.values[i + 1] - b.h.values[i]);
  }
  b.norm_h_tilde = std::sqrt(ht2);
  const double diff2 = b.norm_h * b.norm_h - 2.0 * cross + ht2;
  b.norm_diff = std::sqrt(std::max(0.0, diff2));
  b.pythagoras_residual = b.norm_h * b.norm_h - ht2 - diff2;

  // independently recomputed norm of f_hat
  b.f_hat_norm =
      b.f_hat_is_input ? b.rep.norm : rkhs::to_representation(b.f_hat, H).norm;

  // admissibility evidence
  ConditionReport& rep = b.report;
  rep.phi_norm = b.rep.norm;
  rep.phi_tail = b.rep.norm_tail;
  rep.i_ok = std::isfinite(b.rep.norm) &&
             (rep.phi_tail <= tol.phi_tail_rel * std::max(b.rep.norm, 1e-300));
  rep.k_max_violation = b.k.max_violation;
  rep.k_decay_proxy = b.k.decay_proxy;
  l2h_evidence(b.k, H, rep);
  rep.ii_ok = b.k.nonincreasing && (rep.k_decay_proxy <= tol.decay_eps) &&
              std::isfinite(rep.l2h_proxy_norm) &&
              (H.value() >= 0.5 || rep.ltilde_at_full <= rep.ltilde_at_half ||
               rep.ltilde_at_half == 0.0);

  if (b.f_hat_is_input) {
    rep.roundtrip_residual = 0.0;
    rep.iii_ok = true;
  } else {
    SampledFunction back = frac::weighted_operator(
        b.f_hat.f_prime, H, frac::WeightedKind::K0p_star, b.f_hat.singularity_exponent);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale = std::max(scale, std::fabs(b.hull.h_tilde_prime.values[i]));
    }
    for (std::size_t i = n / 20 + 1; i < n; ++i) {
      worst = std::max(worst,
                       std::fabs(back.values[i] - b.hull.h_tilde_prime.values[i]));
    }
    rep.roundtrip_residual = (scale > 0.0) ? worst / scale : worst;
    rep.iii_ok = rep.roundtrip_residual <= tol.roundtrip_rel;
  }

  rep.fhat_min_gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.fhat_min_gap = std::min(rep.fhat_min_gap, b.f_hat.f.values[i] - f.f.values[i]);
  }
  rep.fhat_geq_f = rep.fhat_min_gap >= -1e-9;
  return b;
}

void write_bundle_csv(const MajorantBundle& b, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  std::string buf = "t,h,h_tilde,h_tilde_prime,K,f_hat\n";
  char tmp[40];
  auto put = [&](double v, char sep) {
    std::snprintf(tmp, sizeof(tmp), "%.17g%c", v, sep);
    buf += tmp;
  };
  for (std::size_t i = 0; i < b.h.size(); ++i) {
    put(b.h.grid.node(i), ',');
    put(b.h.values[i], ',');
    put(b.hull.h_tilde.values[i], ',');
    put(b.hull.h_tilde_prime.values[i], ',');
    put(b.k.K.values[i], ',');
    put(b.f_hat.f.values[i], '\n');
  }
  os << buf;
}

}  // namespace fbmb::majorant
