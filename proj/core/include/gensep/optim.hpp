#pragma once

#include "gensep/mat.hpp"

namespace gensep {

enum class Direction { Minimize, Maximize };

// Per-parameter running mean of squared gradients plus step settings.
struct RmspropState {
  Mat mean_sq;
  double decay = 0.9;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;

  RmspropState() = default;
  RmspropState(std::size_t rows, std::size_t cols, double lr,
               double rho = 0.9, double eps = 1e-8)
      : mean_sq(rows, cols), decay(rho), epsilon(eps), learning_rate(lr) {}
};

// mean_sq <- rho*mean_sq + (1-rho)*grad^2
// param   <- param -/+ lr * grad / (sqrt(mean_sq) + eps)
void rmsprop_step(Mat& param, const Mat& grad, RmspropState& state,
                  Direction direction);

}  // namespace gensep
