#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "fbmb/rkhs.hpp"

namespace fbmb::mc {

enum class Method { cholesky, circulant, volterra };
std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Upper boundary u (u(0) >= 0) with an optional strictly smaller lower
/// channel boundary.
struct Boundary {
  SampledFunction u;
  std::optional<SampledFunction> u_minus;

  Boundary(SampledFunction u_, std::optional<SampledFunction> um = std::nullopt);
};

Boundary constant_boundary(const TimeGrid& g, double u_level,
                           std::optional<double> u_minus_level = std::nullopt);

/// Row-major block of paths; B(p, i) is path p at node t_i, B(.,0) = 0.
/// For the volterra method the driving Wiener increments are retained.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PathEnsemble {
  TimeGrid grid;
  frac::HurstParam H;
  std::size_t m = 0;
  Method method = Method::circulant;
  std::uint64_t seed = 0;
  PathMatrix B;
  std::optional<PathMatrix> dW;  // m x (n-1), volterra only
};

struct EstimatorResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t m = 0;
  std::string method;
  std::uint64_t seed = 0;
  double ess = 0.0;      // equals m for unweighted estimates
  bool ess_warning = false;
};

/// Exact-in-law path generation (cholesky, circulant) and the Volterra
/// construction from a driving Wiener process. Deterministic in
/// (H, grid, m, method, seed); independent of the worker count.
PathEnsemble generate_paths(frac::HurstParam H, const TimeGrid& grid, std::size_t m,
                            Method method, std::uint64_t seed);

/// Streams the same ensemble block by block (fixed block size) without
/// materializing all paths. Blocks arrive in index order.
void for_each_block(frac::HurstParam H, const TimeGrid& grid, std::size_t m, Method method,
                    std::uint64_t seed, bool need_dW,
                    const std::function<void(const PathEnsemble& block)>& consume);

/// Martingale transform of the ensemble: row p, column i holds
/// sum_{j<i} l_H(t_i, s_j) dB_j with singularity-aware evaluation points.
PathMatrix molchan_martingale(const PathEnsemble& ensemble);

/// Same transform evaluated only at the given nodes (columns in node order).
PathMatrix molchan_at(const PathEnsemble& ensemble, const std::vector<std::size_t>& nodes);

/// P(B + f <= u at every node), plain Monte Carlo with a Wilson 95% interval.
EstimatorResult estimate_P(const rkhs::Drift& f, const Boundary& b, frac::HurstParam H,
                           const TimeGrid& grid, std::size_t m, std::uint64_t seed,
                           Method method = Method::circulant);

/// Two-sided channel probability P(u_minus <= B <= u at every node).
EstimatorResult estimate_channel(const Boundary& b, frac::HurstParam H, const TimeGrid& grid,
                                 std::size_t m, std::uint64_t seed,
                                 Method method = Method::circulant);

/// Importance-sampled estimate of P(B + f <= u): the fBm is simulated
/// together with its driving Wiener process, the sampled path plays the role
/// of the shifted process B + tilt, and each path carries the discrete
/// change-of-measure weight exp(sum_j phi_tilt(s_j) dW_j - 1/2 sum_j
/// phi_tilt(s_j)^2 dt), which has unit mean exactly in the discrete model.
EstimatorResult estimate_P_girsanov(const rkhs::Drift& f, const Boundary& b,
                                    frac::HurstParam H, const TimeGrid& grid, std::size_t m,
                                    std::uint64_t seed, const rkhs::RkhsElement& tilt);

/// Binary ensemble dump: 32-byte header {magic "FBMPATHS", u32 version,
/// u32 reserved, u64 m, u64 n}, then row-major little-endian f64.
void write_ensemble(const PathEnsemble& e, const std::string& path);
PathEnsemble read_ensemble(const std::string& path, frac::HurstParam H, const TimeGrid& grid);

}  // namespace fbmb::mc
