#pragma once

namespace fbmb::special {

// Gamma/Beta wrappers. std::tgamma/std::lgamma deliver relative error well
// below 1e-10 over the argument ranges used here (all arguments positive).
double gamma_fn(double x);
double log_gamma(double x);
double beta_fn(double a, double b);

/// Standard normal distribution function, |abs error| < 1e-15.
double normal_cdf(double x);

/// Inverse of normal_cdf (Wichura's AS 241 rational approximation),
/// |abs error| < 1e-9 over p in (0,1). Rejects p outside (0,1).
double normal_quantile(double p);

}  // namespace fbmb::special
