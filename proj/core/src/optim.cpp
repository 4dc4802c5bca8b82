#include "gensep/optim.hpp"

#include <cmath>

#include "gensep/errors.hpp"

namespace gensep {

void rmsprop_step(Mat& param, const Mat& grad, RmspropState& state,
                  Direction direction) {
  if (!param.same_shape(grad) || !param.same_shape(state.mean_sq)) {
    throw DimensionError("rmsprop_step: param/grad/state shapes differ");
  }
  const double rho = state.decay;
  const double sign = direction == Direction::Minimize ? -1.0 : 1.0;
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    const double ms = rho * state.mean_sq[k] + (1.0 - rho) * g * g;
    state.mean_sq[k] = ms;
    param[k] += sign * state.learning_rate * g / (std::sqrt(ms) + state.epsilon);
  }
}

}  // namespace gensep
