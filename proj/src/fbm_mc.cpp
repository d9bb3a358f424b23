#include "fbmb/fbm_mc.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

#include "fbmb/parallel.hpp"
#include "fbmb/special.hpp"

namespace fbmb::mc {

namespace {

constexpr std::size_t kBlockSize = 4096;
constexpr double kZ95 = 1.959963984540054;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t block_seed(std::uint64_t master, Method method, std::size_t block) {
  const std::uint64_t tag = static_cast<std::uint64_t>(method) + 1;
  return splitmix64(splitmix64(master + 0x1234567u * tag) ^
                    splitmix64(static_cast<std::uint64_t>(block) + 1));
}

// evaluation point offset that integrates the leading (t-s)^q cell
// singularity exactly: (t - s*) = dt * (q+1)^{-1/q}
double diag_offset_factor(double q) {
  if (q == 0.0) return std::exp(-1.0);
  return std::pow(q + 1.0, -1.0 / q);
}

// Volterra kernel matrix L(i-1, j) = K_H(t_i, s_ij), i = 1..n-1, j < i, with
// midpoint evaluation except in the diagonal cell. Columns are accumulated
// incrementally so assembly is O(n^2).
Eigen::MatrixXd volterra_kernel_matrix(const TimeGrid& grid, frac::HurstParam H) {
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  const double h = H.value();
  const double a = h - 0.5;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n - 1, n - 1);
  if (H.is_half()) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) L(i, j) = 1.0;
    }
    return L;
  }

  const double c1 = frac::constant_c1(H);
  const double c_simpl = c1 / special::gamma_fn(h > 0.5 ? a : h + 0.5);
  const double diag_shift = dt * diag_offset_factor(a);

  // psi under the inner integral: u^{H-1/2} (H>1/2 simplified form) or
  // u^{H-3/2} (H<1/2 general form)
  const double psi_exp = (h > 0.5) ? a : h - 1.5;
  const double sing_exp = (h > 0.5) ? (h - 1.5) : a;

  auto geometric_span = [&](double s, double hi) {
    // int_s^hi (u-s)^{sing_exp} u^{psi_exp} du with the singular end at u=s
    const int levels = 28;
    const double nu = sing_exp + 1.0;
    double total = 0.0;
    double edge = hi - s;
    double pb = std::pow(s + edge, psi_exp);
    for (int k = 0; k < levels; ++k) {
      const double a_e = edge * 0.5;
      const double pa = std::pow(s + a_e, psi_exp);
      const double slope = (pb - pa) / (edge - a_e);
      const double icpt = pa - slope * a_e;
      const double bp = std::pow(edge, nu);
      const double ap = std::pow(a_e, nu);
      total += icpt * (bp - ap) / nu + slope * (edge * bp - a_e * ap) / (nu + 1.0);
      edge = a_e;
      pb = pa;
    }
    total += pb * std::pow(edge, nu) / nu;
    return total;  // note: lo must equal s for this span
  };

  auto cell_span = [&](double s, double lo, double hi) {
    // one product-integration cell away from the singular end
    const double nu = sing_exp + 1.0;
    const double wa = lo - s, wb = hi - s;
    const double pa = std::pow(lo, psi_exp), pb = std::pow(hi, psi_exp);
    const double slope = (pb - pa) / (wb - wa);
    const double icpt = pa - slope * wa;
    const double wap = std::pow(wa, nu), wbp = std::pow(wb, nu);
    return icpt * (wbp - wap) / nu + slope * (wb * wbp - wa * wap) / (nu + 1.0);
  };

  auto assemble_value = [&](double t, double s, double J) {
    if (h > 0.5) return c_simpl * std::pow(s, -a) * J;
    return c_simpl * (std::pow(t / s, a) * std::pow(t - s, a) - a * std::pow(s, -a) * J);
  };

  fbmb::detail::parallel_for(n - 1, [&](std::size_t j) {
    // column j: s fixed at the cell midpoint, rows i >= j+2
    const double s = (static_cast<double>(j) + 0.5) * dt;
    double J = 0.0;
    bool first = true;
    for (std::size_t i = j + 2; i < n; ++i) {
      if (first) {
        J += geometric_span(s, grid.node(i));
        first = false;
      } else {
        J += cell_span(s, grid.node(i - 1), grid.node(i));
      }
      L(i - 1, j) = assemble_value(grid.node(i), s, J);
    }
    // diagonal entry (i = j+1): shifted evaluation point
    const double t = grid.node(j + 1);
    const double sd = t - diag_shift;
    if (sd > 0.0) {
      const double Jd = geometric_span(sd, t);
      L(j, j) = assemble_value(t, sd, Jd);
    }
  });
  return L;
}

class GeneratorBase {
 public:
  virtual ~GeneratorBase() = default;
  virtual void fill(std::uint64_t bseed, std::size_t rows, PathMatrix& B, PathMatrix* dW) = 0;
  virtual bool provides_dW() const { return false; }
  virtual const Eigen::MatrixXd* kernel_matrix() const { return nullptr; }
};

class CholeskyGenerator final : public GeneratorBase {
 public:
  CholeskyGenerator(frac::HurstParam H, const TimeGrid& grid) : grid_(grid) {
    const std::size_t n = grid.size();
    if (n > 4096) {
      throw std::invalid_argument("cholesky method: grid limited to 4096 nodes");
    }
    Eigen::MatrixXd R(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 1; j <= i; ++j) {
        const double v = rkhs::covariance(grid.node(i), grid.node(j), H);
        R(i - 1, j - 1) = v;
        R(j - 1, i - 1) = v;
      }
    }
    double jitter = 0.0;
    const double scale = R.diagonal().maxCoeff();
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd Rj = R;
      if (jitter > 0.0) Rj.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(Rj);
      if (llt.info() == Eigen::Success) {
        Lt_ = llt.matrixL().transpose();
        return;
      }
      jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 100.0;
      if (jitter > 1e-6 * scale) break;
    }
    throw std::runtime_error("cholesky method: covariance not positive definite after jitter");
  }

  void fill(std::uint64_t bseed, std::size_t rows, PathMatrix& B, PathMatrix*) override {
    const std::size_t n = grid_.size();
    std::mt19937_64 eng(bseed);
    std::normal_distribution<double> nd;
    PathMatrix Z(rows, n - 1);
    for (std::size_t p = 0; p < rows; ++p) {
      for (std::size_t k = 0; k + 1 < n; ++k) Z(p, k) = nd(eng);
    }
    B.col(0).setZero();
    B.rightCols(n - 1).noalias() = Z * Lt_;
  }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd Lt_;
};

std::mutex fftw_mutex;

class CirculantGenerator final : public GeneratorBase {
 public:
  CirculantGenerator(frac::HurstParam H, const TimeGrid& grid) : grid_(grid) {
    const std::size_t n = grid.size();
    const double dt = grid.dt();
    const double twoH = 2.0 * H.value();
    std::size_t M = 1;
    while (M < 2 * (n - 1)) M <<= 1;
    M_ = M;

    std::vector<double> c(M);
    const double var = std::pow(dt, twoH);
    auto cov = [&](std::size_t k) {
      const double kd = static_cast<double>(k);
      return 0.5 * var *
             (std::pow(kd + 1.0, twoH) - 2.0 * std::pow(kd, twoH) +
              std::pow(std::fabs(kd - 1.0), twoH));
    };
    for (std::size_t k = 0; k <= M / 2; ++k) c[k] = cov(k);
    for (std::size_t k = M / 2 + 1; k < M; ++k) c[k] = c[M - k];

    std::lock_guard<std::mutex> lock(fftw_mutex);
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * M));
    plan_ = fftw_plan_dft_1d(static_cast<int>(M), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t k = 0; k < M; ++k) {
      buf_[k][0] = c[k];
      buf_[k][1] = 0.0;
    }
    fftw_execute(plan_);
    scale_.resize(M);
    double lmax = 0.0;
    for (std::size_t k = 0; k < M; ++k) lmax = std::max(lmax, buf_[k][0]);
    for (std::size_t k = 0; k < M; ++k) {
      double lam = buf_[k][0];
      if (lam < 0.0) {
        if (lam < -1e-10 * lmax) {
          throw std::runtime_error("circulant method: embedding is not nonnegative definite");
        }
        lam = 0.0;
      }
      scale_[k] = std::sqrt(lam / static_cast<double>(M));
    }
  }

  ~CirculantGenerator() override {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }

  void fill(std::uint64_t bseed, std::size_t rows, PathMatrix& B, PathMatrix*) override {
    const std::size_t n = grid_.size();
    std::mt19937_64 eng(bseed);
    std::normal_distribution<double> nd;
    fftw_complex* work = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * M_));
    for (std::size_t p = 0; p < rows; p += 2) {
      for (std::size_t k = 0; k < M_; ++k) {
        work[k][0] = scale_[k] * nd(eng);
        work[k][1] = scale_[k] * nd(eng);
      }
      fftw_execute_dft(plan_, work, work);
      B(p, 0) = 0.0;
      double acc = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        acc += work[i - 1][0];
        B(p, i) = acc;
      }
      if (p + 1 < rows) {
        B(p + 1, 0) = 0.0;
        acc = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
          acc += work[i - 1][1];
          B(p + 1, i) = acc;
        }
      }
    }
    fftw_free(work);
  }

 private:
  TimeGrid grid_;
  std::size_t M_ = 0;
  std::vector<double> scale_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_{};
};

class VolterraGenerator final : public GeneratorBase {
 public:
  VolterraGenerator(frac::HurstParam H, const TimeGrid& grid)
      : grid_(grid), Lt_(volterra_kernel_matrix(grid, H).transpose()) {}

  void fill(std::uint64_t bseed, std::size_t rows, PathMatrix& B, PathMatrix* dW) override {
    const std::size_t n = grid_.size();
    const double sdt = std::sqrt(grid_.dt());
    std::mt19937_64 eng(bseed);
    std::normal_distribution<double> nd;
    PathMatrix W(rows, n - 1);
    for (std::size_t p = 0; p < rows; ++p) {
      for (std::size_t k = 0; k + 1 < n; ++k) W(p, k) = sdt * nd(eng);
    }
    B.col(0).setZero();
    B.rightCols(n - 1).noalias() = W * Lt_;
    if (dW != nullptr) *dW = std::move(W);
  }

  bool provides_dW() const override { return true; }
  const Eigen::MatrixXd* kernel_matrix() const override { return &Lt_; }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd Lt_;  // (n-1) x (n-1), upper triangular
};

std::unique_ptr<GeneratorBase> make_generator(frac::HurstParam H, const TimeGrid& grid,
                                              Method method) {
  switch (method) {
    case Method::cholesky:  return std::make_unique<CholeskyGenerator>(H, grid);
    case Method::circulant: return std::make_unique<CirculantGenerator>(H, grid);
    case Method::volterra:  return std::make_unique<VolterraGenerator>(H, grid);
  }
  throw std::logic_error("unknown method");
}

struct BlockLayout {
  std::size_t count;
  std::size_t rows(std::size_t b, std::size_t m) const {
    const std::size_t lo = b * kBlockSize;
    return std::min(kBlockSize, m - lo);
  }
};

BlockLayout layout(std::size_t m) { return {(m + kBlockSize - 1) / kBlockSize}; }

void run_blocks(GeneratorBase& gen, frac::HurstParam H, const TimeGrid& grid, std::size_t m,
                Method method, std::uint64_t seed, bool need_dW,
                const std::function<void(const PathEnsemble&)>& consume) {
  const BlockLayout bl = layout(m);
  const std::size_t wave = std::max<std::size_t>(1, fbmb::detail::worker_count());
  std::vector<PathEnsemble> slots;
  for (std::size_t b0 = 0; b0 < bl.count; b0 += wave) {
    const std::size_t nb = std::min(wave, bl.count - b0);
    slots.clear();
    slots.resize(nb, PathEnsemble{grid, H, 0, method, seed, {}, std::nullopt});
    fbmb::detail::parallel_for(nb, [&](std::size_t k) {
      const std::size_t b = b0 + k;
      const std::size_t rows = bl.rows(b, m);
      PathEnsemble& e = slots[k];
      e.m = rows;
      e.B.resize(rows, grid.size());
      PathMatrix dW;
      gen.fill(block_seed(seed, method, b), rows, e.B, need_dW ? &dW : nullptr);
      if (need_dW) e.dW = std::move(dW);
    });
    for (std::size_t k = 0; k < nb; ++k) consume(slots[k]);
  }
}

void wilson_interval(EstimatorResult& r) {
  const double m = static_cast<double>(r.m);
  const double p = r.estimate;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / m;
  const double center = (p + z2 / (2.0 * m)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / denom;
  r.ci_lo = std::max(0.0, center - half);
  r.ci_hi = std::min(1.0, center + half);
  r.std_error = std::sqrt(p * (1.0 - p) / m);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::cholesky:  return "cholesky";
    case Method::circulant: return "circulant";
    case Method::volterra:  return "volterra";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "cholesky") return Method::cholesky;
  if (name == "circulant") return Method::circulant;
  if (name == "volterra") return Method::volterra;
  throw std::invalid_argument("unknown path generation method: " + name);
}

Boundary::Boundary(SampledFunction u_, std::optional<SampledFunction> um)
    : u(std::move(u_)), u_minus(std::move(um)) {
  require_finite(u, "Boundary.u");
  if (u.values[0] < 0.0) throw std::invalid_argument("Boundary: u(0) must be >= 0");
  if (u_minus) {
    require_same_grid(u, *u_minus, "Boundary");
    require_finite(*u_minus, "Boundary.u_minus");
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(u_minus->values[i] < u.values[i])) {
        throw std::invalid_argument("Boundary: u_minus must lie strictly below u (node " +
                                    std::to_string(i) + ")");
      }
    }
  }
}

Boundary constant_boundary(const TimeGrid& g, double u_level, std::optional<double> um) {
  SampledFunction u(g);
  for (double& v : u.values) v = u_level;
  std::optional<SampledFunction> umf;
  if (um) {
    SampledFunction w(g);
    for (double& v : w.values) v = *um;
    umf = std::move(w);
  }
  return Boundary(std::move(u), std::move(umf));
}

PathEnsemble generate_paths(frac::HurstParam H, const TimeGrid& grid, std::size_t m,
                            Method method, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("generate_paths: need m >= 1");
  if (m * grid.size() > 50'000'000) {
    throw std::invalid_argument(
        "generate_paths: ensemble too large to materialize; use for_each_block");
  }
  auto gen = make_generator(H, grid, method);
  PathEnsemble out{grid, H, m, method, seed, {}, std::nullopt};
  out.B.resize(m, grid.size());
  const bool keep_dW = gen->provides_dW();
  if (keep_dW) out.dW = PathMatrix(m, grid.size() - 1);
  const BlockLayout bl = layout(m);
  fbmb::detail::parallel_for(bl.count, [&](std::size_t b) {
    const std::size_t rows = bl.rows(b, m);
    const std::size_t lo = b * kBlockSize;
    PathMatrix Bb(rows, grid.size());
    PathMatrix dWb;
    gen->fill(block_seed(seed, method, b), rows, Bb, keep_dW ? &dWb : nullptr);
    out.B.middleRows(lo, rows) = Bb;
    if (keep_dW) out.dW->middleRows(lo, rows) = dWb;
  });
  return out;
}

void for_each_block(frac::HurstParam H, const TimeGrid& grid, std::size_t m, Method method,
                    std::uint64_t seed, bool need_dW,
                    const std::function<void(const PathEnsemble&)>& consume) {
  auto gen = make_generator(H, grid, method);
  if (need_dW && !gen->provides_dW()) {
    throw std::invalid_argument("for_each_block: method does not expose the driving noise");
  }
  run_blocks(*gen, H, grid, m, method, seed, need_dW, consume);
}

namespace {

std::vector<double> molchan_weights(const TimeGrid& grid, frac::HurstParam H,
                                    std::size_t node) {
  // weights w_j so that M(t_node) = sum_j w_j dB_j
  const double dt = grid.dt();
  const double q = 0.5 - H.value();
  const double cl = frac::molchan_constant(H);
  const double t = grid.node(node);
  std::vector<double> w(node, 0.0);
  if (node == 0) return w;
  if (node == 1) {
    // both singular factors live in one cell: use its exact mass
    w[0] = cl * std::pow(dt, 2.0 * q) * special::beta_fn(q + 1.0, q + 1.0);
    return w;
  }
  const double off = dt * diag_offset_factor(q);
  for (std::size_t j = 0; j < node; ++j) {
    double s;
    if (j == 0) {
      s = off;  // s-side singularity
    } else if (j + 1 == node) {
      s = t - off;  // t-side singularity
    } else {
      s = (static_cast<double>(j) + 0.5) * dt;
    }
    w[j] = cl * std::pow(s, q) * std::pow(t - s, q);
  }
  return w;
}

}  // namespace

PathMatrix molchan_at(const PathEnsemble& e, const std::vector<std::size_t>& nodes) {
  const std::size_t n = e.grid.size();
  PathMatrix out(e.B.rows(), nodes.size());
  Eigen::MatrixXd Wt = Eigen::MatrixXd::Zero(n - 1, nodes.size());
  for (std::size_t c = 0; c < nodes.size(); ++c) {
    if (nodes[c] >= n) throw std::invalid_argument("molchan_at: node out of range");
    const auto w = molchan_weights(e.grid, e.H, nodes[c]);
    for (std::size_t j = 0; j < w.size(); ++j) Wt(j, c) = w[j];
  }
  PathMatrix dB = e.B.rightCols(n - 1) - e.B.leftCols(n - 1);
  out.noalias() = dB * Wt;
  return out;
}

PathMatrix molchan_martingale(const PathEnsemble& e) {
  std::vector<std::size_t> nodes(e.grid.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  return molchan_at(e, nodes);
}

EstimatorResult estimate_P(const rkhs::Drift& f, const Boundary& b, frac::HurstParam H,
                           const TimeGrid& grid, std::size_t m, std::uint64_t seed,
                           Method method) {
  if (m < 100) throw std::invalid_argument("estimate_P: need m >= 100 for a meaningful error bar");
  require_same_grid(f.f, b.u, "estimate_P");
  if (!(f.f.grid == grid)) throw std::invalid_argument("estimate_P: drift grid mismatch");
  const std::size_t n = grid.size();
  std::size_t hits = 0;
  for_each_block(H, grid, m, method, seed, false, [&](const PathEnsemble& blk) {
    for (Eigen::Index p = 0; p < blk.B.rows(); ++p) {
      bool ok = true;
      const double* row = blk.B.row(p).data();
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] + f.f.values[i] > b.u.values[i]) {
          ok = false;
          break;
        }
      }
      hits += ok;
    }
  });
  EstimatorResult r;
  r.m = m;
  r.method = method_name(method);
  r.seed = seed;
  r.estimate = static_cast<double>(hits) / static_cast<double>(m);
  r.ess = static_cast<double>(m);
  wilson_interval(r);
  return r;
}

EstimatorResult estimate_channel(const Boundary& b, frac::HurstParam H, const TimeGrid& grid,
                                 std::size_t m, std::uint64_t seed, Method method) {
  if (!b.u_minus) throw std::invalid_argument("estimate_channel: boundary has no u_minus");
  if (m < 100) throw std::invalid_argument("estimate_channel: need m >= 100");
  const std::size_t n = grid.size();
  if (b.u_minus->values[0] > 0.0) {
    throw std::invalid_argument("estimate_channel: u_minus(0) > 0 makes the event impossible");
  }
  std::size_t hits = 0;
  for_each_block(H, grid, m, method, seed, false, [&](const PathEnsemble& blk) {
    for (Eigen::Index p = 0; p < blk.B.rows(); ++p) {
      bool ok = true;
      const double* row = blk.B.row(p).data();
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] > b.u.values[i] || row[i] < b.u_minus->values[i]) {
          ok = false;
          break;
        }
      }
      hits += ok;
    }
  });
  EstimatorResult r;
  r.m = m;
  r.method = method_name(method);
  r.seed = seed;
  r.estimate = static_cast<double>(hits) / static_cast<double>(m);
  r.ess = static_cast<double>(m);
  wilson_interval(r);
  return r;
}

EstimatorResult estimate_P_girsanov(const rkhs::Drift& f, const Boundary& b,
                                    frac::HurstParam H, const TimeGrid& grid, std::size_t m,
                                    std::uint64_t seed, const rkhs::RkhsElement& tilt) {
  if (m < 100) throw std::invalid_argument("estimate_P_girsanov: need m >= 100");
  require_same_grid(f.f, b.u, "estimate_P_girsanov");
  if (!(tilt.phi.grid == grid)) {
    throw std::invalid_argument("estimate_P_girsanov: tilt grid mismatch");
  }
  const std::size_t n = grid.size();
  const double dt = grid.dt();

  auto gen = make_generator(H, grid, Method::volterra);
  const Eigen::MatrixXd& Lt = *gen->kernel_matrix();  // (n-1) x (n-1)

  // discrete shift consistent with the kernel matrix: tilt_i = sum_j L(i,j) phi_j dt
  Eigen::VectorXd phi(n - 1);
  double half_energy = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    phi(j) = tilt.phi.values[j];
    half_energy += 0.5 * phi(j) * phi(j) * dt;
  }
  Eigen::VectorXd shift_tail = Lt.transpose().triangularView<Eigen::Lower>() * (phi * dt);
  std::vector<double> shift(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) shift[i] = shift_tail(i - 1);

  double sum_x = 0.0, sum_x2 = 0.0, sum_w = 0.0, sum_w2 = 0.0;
  run_blocks(*gen, H, grid, m, Method::volterra, seed, true, [&](const PathEnsemble& blk) {
    for (Eigen::Index p = 0; p < blk.B.rows(); ++p) {
      double logw = -half_energy;
      for (std::size_t j = 0; j + 1 < n; ++j) logw += phi(j) * (*blk.dW)(p, j);
      if (logw > 690.0) {
        throw std::runtime_error(
            "estimate_P_girsanov: importance weight overflow; use a smaller tilt");
      }
      const double w = std::exp(logw);
      bool ok = true;
      const double* row = blk.B.row(p).data();
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] + f.f.values[i] - shift[i] > b.u.values[i]) {
          ok = false;
          break;
        }
      }
      const double x = ok ? w : 0.0;
      sum_x += x;
      sum_x2 += x * x;
      sum_w += w;
      sum_w2 += w * w;
    }
  });

  EstimatorResult r;
  r.m = m;
  r.method = "volterra+girsanov";
  r.seed = seed;
  const double md = static_cast<double>(m);
  r.estimate = sum_x / md;
  const double var = std::max(0.0, sum_x2 / md - r.estimate * r.estimate);
  r.std_error = std::sqrt(var / md);
  r.ci_lo = std::max(0.0, r.estimate - kZ95 * r.std_error);
  r.ci_hi = r.estimate + kZ95 * r.std_error;
  r.ess = (sum_w2 > 0.0) ? sum_w * sum_w / sum_w2 : 0.0;
  r.ess_warning = r.ess < 0.01 * md;
  return r;
}

void write_ensemble(const PathEnsemble& e, const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "ensemble format is little-endian");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  char header[32] = {};
  std::memcpy(header, "FBMPATHS", 8);
  const std::uint32_t version = 1, reserved = 0;
  std::memcpy(header + 8, &version, 4);
  std::memcpy(header + 12, &reserved, 4);
  const std::uint64_t m = e.m, n = e.grid.size();
  std::memcpy(header + 16, &m, 8);
  std::memcpy(header + 24, &n, 8);
  os.write(header, sizeof(header));
  os.write(reinterpret_cast<const char*>(e.B.data()),
           static_cast<std::streamsize>(sizeof(double) * e.B.size()));
  if (!os) throw std::runtime_error("short write: " + path);
}

PathEnsemble read_ensemble(const std::string& path, frac::HurstParam H, const TimeGrid& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char header[32];
  is.read(header, sizeof(header));
  if (!is || std::memcmp(header, "FBMPATHS", 8) != 0) {
    throw std::runtime_error("not an ensemble file: " + path);
  }
  std::uint32_t version;
  std::memcpy(&version, header + 8, 4);
  if (version != 1) throw std::runtime_error("unsupported ensemble version");
  std::uint64_t m, n;
  std::memcpy(&m, header + 16, 8);
  std::memcpy(&n, header + 24, 8);
  if (n != grid.size()) throw std::runtime_error("ensemble grid size mismatch");
  PathEnsemble e{grid, H, static_cast<std::size_t>(m), Method::volterra, 0, {}, std::nullopt};
  e.B.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(e.B.data()),
          static_cast<std::streamsize>(sizeof(double) * e.B.size()));
  if (!is) throw std::runtime_error("short read: " + path);
  return e;
}

}  // namespace fbmb::mc
