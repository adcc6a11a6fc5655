#pragma once

#include <functional>

#include "vitret/tensor.hpp"

namespace vitret {

/// Central-difference verification of the tape gradient of a scalar-valued
/// function at x. Returns max over elements of
/// |analytic - numeric| / max(1, |numeric|).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double step = 1e-5);

}  // namespace vitret
