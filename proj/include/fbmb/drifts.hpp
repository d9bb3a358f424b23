#pragma once

#include "fbmb/rkhs.hpp"

namespace fbmb::drifts {

/// Built-in admissible drift families, named after the CLI presets.
///
/// example51 (H > 1/2): the drift whose representation is
/// phi(t) = t^{1/2-H} e^{-t}; its running integral h is concave and
/// nondecreasing, so the drift solves its own majorant problem.
rkhs::Drift example51(const TimeGrid& grid, double gamma, frac::HurstParam H);
SampledFunction example51_phi(const TimeGrid& grid, double gamma, frac::HurstParam H);

/// example52 (H < 1/2): phi(t) = t^{H-1/2} e^{-t}. The derivative has the
/// closed form f'(t) = C2 (t^{2H-1} - t^{H-1/2} G(t)) with
/// G(t) = int_0^t (t-u)^{H-1/2} e^{-u} du.
rkhs::Drift example52(const TimeGrid& grid, double gamma, frac::HurstParam H);
SampledFunction example52_phi(const TimeGrid& grid, double gamma, frac::HurstParam H);

}  // namespace fbmb::drifts
