#include "vitret/grad_check.hpp"

#include <cmath>

namespace vitret {

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double step) {
  Tensor probe = x;
  probe.set_requires_grad(true);

  Tensor analytic;
  {
    GradTape tape;
    TapeScope scope(tape);
    // Register before calling f so copies of the probe (function arguments,
    // container elements) share its node handle.
    tape.leaf(probe);
    Tensor loss = f(probe);
    if (loss.size() != 1) {
      throw ShapeError("grad_check: function must be scalar-valued, got " +
                       shape_str(loss.shape()));
    }
    GradMap grads = tape.backward(loss);
    analytic = grad_for(grads, probe);
  }

  double worst = 0.0;
  Tensor shifted = x;  // tape-free evaluations
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = shifted[i];
    shifted[i] = saved + step;
    const double up = f(shifted).item();
    shifted[i] = saved - step;
    const double down = f(shifted).item();
    shifted[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double rel =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace vitret
