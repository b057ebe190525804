#pragma once

#include <functional>
#include <span>

#include "tapeopt/tape.hpp"

namespace tapeopt {

// Builds a loss graph on the given tape from the current parameter values.
// Must register exactly one trainable leaf per parameter, in order, and
// return the (real scalar) loss node.
using LossBuilder = std::function<NodeId(Tape&, std::span<const Tensor>)>;

// Max over all parameter elements of
//   |analytic - central_difference| / max(|analytic|, floor)
// with the central difference taken at the given step. The floor keeps the
// relative error meaningful near stationary points. Zero parameters -> 0.
double grad_check(const LossBuilder& build, std::span<const Tensor> params, double step,
                  double floor = 1e-3);

}  // namespace tapeopt
