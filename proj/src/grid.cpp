#include "fbmb/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fbmb {

TimeGrid::TimeGrid(double horizon, std::size_t n_points) : horizon_(horizon), n_(n_points) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("TimeGrid: horizon must be a positive finite real");
  }
  if (n_points < 2) {
    throw std::invalid_argument("TimeGrid: need at least 2 nodes");
  }
  dt_ = horizon_ / static_cast<double>(n_ - 1);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(n_);
  for (std::size_t i = 0; i < n_; ++i) t[i] = node(i);
  return t;
}

SampledFunction::SampledFunction(TimeGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("SampledFunction: value count does not match grid");
  }
}

SampledFunction::SampledFunction(TimeGrid g) : grid(g), values(g.size(), 0.0) {}

void require_finite(const SampledFunction& f, const char* what) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f.values[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at node " +
                                  std::to_string(i));
    }
  }
}

void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* what) {
  if (!(a.grid == b.grid)) {
    throw std::invalid_argument(std::string(what) + ": grids differ");
  }
}

SampledFunction cumulative_integral(const SampledFunction& f) {
  return cumulative_integral(f, 0.0);
}

SampledFunction cumulative_integral(const SampledFunction& f, double p) {
  require_finite(f, "cumulative_integral");
  if (!(p > -1.0)) {
    throw std::invalid_argument("cumulative_integral: singularity exponent must be > -1");
  }
  const std::size_t n = f.size();
  const double dt = f.grid.dt();
  SampledFunction out(f.grid);
  out.values[0] = 0.0;
  if (n < 2) return out;
  if (p != 0.0) {
    // first cell: integral of c*t^p with c = f(t_1)/t_1^p
    const double t1 = f.grid.node(1);
    const double c = f.values[1] / std::pow(t1, p);
    out.values[1] = c * std::pow(t1, p + 1.0) / (p + 1.0);
  } else {
    out.values[1] = 0.5 * (f.values[0] + f.values[1]) * dt;
  }
  for (std::size_t i = 2; i < n; ++i) {
    out.values[i] = out.values[i - 1] + 0.5 * (f.values[i - 1] + f.values[i]) * dt;
  }
  return out;
}

double l2_norm(const SampledFunction& f) { return l2_norm(f, 0.0); }

double l2_norm(const SampledFunction& f, double p) {
  require_finite(f, "l2_norm");
  if (!(p > -0.5)) {
    throw std::invalid_argument("l2_norm: singularity exponent must be > -1/2 for square integrability");
  }
  const std::size_t n = f.size();
  const double dt = f.grid.dt();
  double acc = 0.0;
  if (n >= 2) {
    if (p != 0.0) {
      // integral of (c*t^p)^2 over the first cell, c matched at t_1
      const double t1 = f.grid.node(1);
      const double c = f.values[1] / std::pow(t1, p);
      acc += c * c * std::pow(t1, 2.0 * p + 1.0) / (2.0 * p + 1.0);
    } else {
      acc += 0.5 * (f.values[0] * f.values[0] + f.values[1] * f.values[1]) * dt;
    }
    for (std::size_t i = 2; i < n; ++i) {
      acc += 0.5 * (f.values[i - 1] * f.values[i - 1] + f.values[i] * f.values[i]) * dt;
    }
  }
  return std::sqrt(acc);
}

StieltjesResult stieltjes_vs_decreasing(const SampledFunction& u, const SampledFunction& K) {
  require_same_grid(u, K, "stieltjes_vs_decreasing");
  require_finite(u, "stieltjes_vs_decreasing(u)");
  require_finite(K, "stieltjes_vs_decreasing(K)");
  const std::size_t n = K.size();
  double kmax = 0.0;
  for (double v : K.values) kmax = std::max(kmax, std::fabs(v));
  const double tol = 1e-9 * kmax;

  StieltjesResult r;
  for (std::size_t i = 1; i < n; ++i) {
    double drop = K.values[i - 1] - K.values[i];
    if (drop < 0.0) {
      if (-drop > tol) {
        throw std::invalid_argument(
            "stieltjes_vs_decreasing: integrator increases by " + std::to_string(-drop) +
            " at node " + std::to_string(i) + " (beyond tolerance)");
      }
      drop = 0.0;  // clamp float noise
    }
    r.value += 0.5 * (u.values[i] + u.values[i - 1]) * drop;
  }
  r.tail_bound = std::fabs(u.values[n - 1]) * std::fabs(K.values[n - 1]);
  return r;
}

namespace {
void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}
}  // namespace

void write_csv(const SampledFunction& f, std::ostream& os) {
  std::string buf;
  buf.reserve(f.size() * 48 + 16);
  buf += "t,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    format_double(buf, f.grid.node(i));
    buf += ',';
    format_double(buf, f.values[i]);
    buf += '\n';
  }
  os << buf;
}

void write_csv_file(const SampledFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(f, os);
}

SampledFunction read_csv(std::istream& is) {
  std::string line;
  std::vector<double> t, v;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // skip a header row if present
      header_seen = true;
      if (!line.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) ||
                             line[0] == '-' || line[0] == '+' || line[0] == '.')) {
        continue;
      }
    }
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw std::runtime_error("csv: malformed line: " + line);
    }
    t.push_back(std::stod(a));
    v.push_back(std::stod(b));
  }
  if (t.size() < 2) throw std::runtime_error("csv: need at least two rows");
  TimeGrid g(t.back(), t.size());
  const double dt = g.dt();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::fabs(t[i] - g.node(i)) > 1e-9 * std::max(1.0, t.back())) {
      throw std::runtime_error("csv: nodes are not a uniform grid starting at 0 (row " +
                               std::to_string(i) + ", dt=" + std::to_string(dt) + ")");
    }
  }
  return SampledFunction(g, std::move(v));
}

SampledFunction read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_csv(is);
}

}  // namespace fbmb
