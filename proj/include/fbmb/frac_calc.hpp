#pragma once

#include <string>

#include "fbmb/grid.hpp"

namespace fbmb::frac {

/// Hurst index H in (0,1). H = 1/2 short-circuits the weighted operators
/// to the identity.
class HurstParam {
 public:
  explicit HurstParam(double h);
  double value() const { return h_; }
  bool is_half() const { return h_ == 0.5; }

 private:
  double h_;
};

struct Constants {
  double c1 = 0.0;            // normalization of the weighted operators
  double c2 = 0.0;            // c1 / Gamma(H + 1/2)
  double c3 = 0.0;            // c2 * B(3/2-H, H-1/2), defined for H > 1/2 only
  double c4 = 0.0;            // (1/2-H) * B(H+1/2, 1/2-H), defined for H < 1/2 only
  bool has_c3 = false;
  bool has_c4 = false;
};

Constants constants(HurstParam H);
double constant_c1(HurstParam H);

// Test hook: scales c1 to let the self-test battery demonstrate that the
// constant identities actually detect corruption. Leave at 1 in normal use.
namespace detail {
extern double c1_fault_scale;
}

enum class IntegralSide { left_0, right_T, weyl };
enum class DerivativeSide { left_0, right_inf };
enum class WeightedKind { K0p, K0p_star, Kinf, Kinf_star };
enum class KernelKind { K_H, K_H_star, l_H };

struct TailReport {
  double remainder = 0.0;   // estimated mass beyond the grid horizon
  bool warning = false;     // set when the tail does not appear to decay
};

/// Riemann-Liouville / Weyl fractional integral of order alpha > 0 by
/// product integration: the kernel power is integrated exactly against the
/// piecewise-linear interpolant of f. A declared power singularity of f at
/// t = 0 (exponent p > -1) is honored on the first cell. The Weyl variant
/// integrates to the grid end and can report a tail remainder estimated from
/// the decay of the last decade of samples.
SampledFunction frac_integral(const SampledFunction& f, double alpha, IntegralSide side,
                              double singularity_exponent = 0.0, TailReport* tail = nullptr);

/// Fractional derivative of order alpha in (0,1), computed as the grid
/// derivative of the complementary fractional integral (central differences,
/// one-sided at the ends). The right-sided variant carries the leading minus.
SampledFunction frac_derivative(const SampledFunction& f, double alpha, DerivativeSide side,
                                double singularity_exponent = 0.0);

/// Weighted fractional operators
///   (K0p f)(t)       = c1   t^{H-1/2} (I_{0+}^{H-1/2}   u^{1/2-H} f(u))(t)
///   (K0p_star f)(t)  = c1^-1 t^{H-1/2} (I_{0+}^{1/2-H}  u^{1/2-H} f(u))(t)
///   (Kinf f)(t)      = c1   t^{1/2-H} (I_{inf-}^{H-1/2} u^{H-1/2} f(u))(t)
///   (Kinf_star f)(t) = c1^-1 t^{1/2-H} (I_{inf-}^{1/2-H} u^{H-1/2} f(u))(t)
/// where a negative order means the fractional derivative of the opposite
/// order. For H = 1/2 the input is returned unchanged.
SampledFunction weighted_operator(const SampledFunction& f, HurstParam H, WeightedKind kind,
                                  double singularity_exponent = 0.0, TailReport* tail = nullptr);

/// Pointwise kernels for 0 < s < t. K_H is the Volterra kernel of the moving
/// average representation, K_H_star its inverse-transform companion, l_H the
/// kernel of the fundamental martingale.
double eval_kernel(KernelKind kind, double t, double s, HurstParam H);

/// Constant in l_H, sqrt(Gamma(3-2H) / (2H Gamma(3/2-H)^3 Gamma(H+1/2))).
double molchan_constant(HurstParam H);

struct QPrimeResult {
  SampledFunction q_prime;
  /// max_t | int_0^t q'(s) s^{H-1/2} ds - int_0^t (K0p_star f')(s) ds |,
  /// relative to the sup of the right-hand side.
  double identity_residual = 0.0;
};

/// Density q' of the martingale drift, normalized so that
/// s^{H-1/2} q'(s) = (K0p_star f')(s). Computed through the one-sided
/// convolution forms (direct for H < 1/2, via the complementary integral and
/// differentiation for H > 1/2), not by reusing the weighted-operator output.
QPrimeResult q_prime(const SampledFunction& f_prime, HurstParam H,
                     double singularity_exponent = 0.0);

}  // namespace fbmb::frac
