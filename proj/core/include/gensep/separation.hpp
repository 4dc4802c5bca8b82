#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gensep/mat.hpp"
#include "gensep/training.hpp"

namespace gensep {

struct SeparationConfig {
  double alpha = 0.1;  // critic-score weight
  double beta = 0.1;   // temporal-smoothness weight
  std::size_t iterations = 20000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::size_t trace_every = 100;

  void validate() const;
};

struct SeparationResult {
  Mat s1_hat, s2_hat;  // data_dim x T magnitude estimates, >= 0
  Mat h1, h2;          // final latent trajectories
  std::vector<std::pair<std::size_t, double>> objective_trace;
};

// The maximized test-time objective over both latent trajectories:
//   (1/T)  sum_t  -KL(x_t || f1(h1_t) + f2(h2_t))
// + (alpha/T) sum_t score_1(f1(h1_t)) + score_2(f2(h2_t))
// - (beta/(T-1)) sum_t sum_k || f_k(h_k_{t+1}) - f_k(h_k_t) ||_1
// where score is the raw critic value for the Wasserstein kinds and
// log D for the standard adversarial kind; the critic term is dropped for
// models without a critic or when alpha = 0, and the smoothness term is
// dropped when T < 2.
double separation_objective(const Mat& mixture, const TrainedSourceModel& m1,
                            const TrainedSourceModel& m2, const Mat& h1,
                            const Mat& h2, const SeparationConfig& cfg);

// Gradients of the objective w.r.t. both latent trajectories. The L1
// smoothness subgradient uses sign(0) = 0.
std::pair<Mat, Mat> separation_objective_grad(const Mat& mixture,
                                              const TrainedSourceModel& m1,
                                              const TrainedSourceModel& m2,
                                              const Mat& h1, const Mat& h2,
                                              const SeparationConfig& cfg);

// Joint latent ascent with frozen model parameters. Latents start from
// standard-normal draws (Gaussian-input models), the mixture frames
// (data-dimensional autoencoding models), or Uniform(0.1, 1) (nmf). A pair
// of nmf models is routed to nmf_separate; mixing nmf with a network model
// is rejected.
SeparationResult separate(const Mat& mixture, const TrainedSourceModel& m1,
                          const TrainedSourceModel& m2,
                          const SeparationConfig& cfg);

// Multiplicative updates of the stacked activations against the fixed
// concatenated dictionary [W1 | W2]; estimates are the per-model shares.
SeparationResult nmf_separate(const Mat& mixture, const TrainedSourceModel& m1,
                              const TrainedSourceModel& m2,
                              const SeparationConfig& cfg);

}  // namespace gensep
