#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fbmb {

/// Uniform grid on [0, T] with n_points nodes, t_i = i * dt, dt = T / (n_points - 1).
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_points);

  double horizon() const { return horizon_; }
  std::size_t size() const { return n_; }
  double dt() const { return dt_; }
  double node(std::size_t i) const { return static_cast<double>(i) * dt_; }
  std::vector<double> nodes() const;

  bool operator==(const TimeGrid& o) const {
    return horizon_ == o.horizon_ && n_ == o.n_;
  }

 private:
  double horizon_;
  std::size_t n_;
  double dt_;
};

/// Node samples of a real function on a TimeGrid. Values must be finite;
/// functions with an integrable power singularity at t = 0 store 0 at the
/// first node and consumers receive the singularity exponent separately.
struct SampledFunction {
  TimeGrid grid;
  std::vector<double> values;

  SampledFunction(TimeGrid g, std::vector<double> v);
  explicit SampledFunction(TimeGrid g);  // zero-initialized

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

void require_finite(const SampledFunction& f, const char* what);
void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* what);

/// Running trapezoid integral, F(0) = 0. With a declared singularity
/// exponent p (> -1) the first cell uses the local power-law closed form
/// integral of c*t^p with c matched at t_1.
SampledFunction cumulative_integral(const SampledFunction& f);
SampledFunction cumulative_integral(const SampledFunction& f, double singularity_exponent);

/// L2 norm by trapezoid quadrature of f^2; the overload handles an
/// integrable power singularity at 0 (requires p > -1/2).
double l2_norm(const SampledFunction& f);
double l2_norm(const SampledFunction& f, double singularity_exponent);

struct StieltjesResult {
  double value = 0.0;
  double tail_bound = 0.0;  // |u(T)| * |K(T)|, the mass possibly left beyond T
};

/// Midpoint Riemann-Stieltjes sum of u against the nonincreasing integrator
/// -K: sum over cells of (u_i + u_{i-1})/2 * (K_{i-1} - K_i).
/// Violations of monotonicity up to 1e-9 * max|K| are clamped; larger ones
/// are rejected.
StieltjesResult stieltjes_vs_decreasing(const SampledFunction& u, const SampledFunction& K);

/// Two-column CSV: header "t,value", %.17g, LF line endings.
void write_csv(const SampledFunction& f, std::ostream& os);
void write_csv_file(const SampledFunction& f, const std::string& path);
SampledFunction read_csv(std::istream& is);
SampledFunction read_csv_file(const std::string& path);

}  // namespace fbmb
