#pragma once

#include <string>

#include "fbmb/frac_calc.hpp"
#include "fbmb/grid.hpp"

namespace fbmb::rkhs {

/// Absolutely continuous trend with f(0) = 0, carried by derivative samples.
struct Drift {
  SampledFunction f_prime;
  SampledFunction f;               // cumulative integral of f_prime
  double singularity_exponent = 0.0;  // power behavior of f' at the origin
  std::string name;
};

Drift make_drift(SampledFunction f_prime, double singularity_exponent, std::string name);
Drift scale_drift(const Drift& d, double gamma);

/// phi = K0p_star f' together with the norm data it induces.
struct RkhsElement {
  SampledFunction phi;
  double norm = 0.0;        // L2 norm of phi on [0, T]
  double norm_tail = 0.0;   // estimated L2 mass of phi beyond T
  frac::HurstParam H;
  std::string source;
  double roundtrip_residual = 0.0;  // relative defect of K0p(phi) against f'
  double phi_singularity = 0.0;     // power behavior of phi at the origin
};

double covariance(double s, double t, frac::HurstParam H);

RkhsElement to_representation(const Drift& f, frac::HurstParam H);
Drift reconstruct(const RkhsElement& phi);
SampledFunction h_function(const RkhsElement& phi);

}  // namespace fbmb::rkhs
