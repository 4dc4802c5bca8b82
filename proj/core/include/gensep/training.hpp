#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "gensep/models.hpp"
#include "gensep/rng.hpp"

namespace gensep {

struct TrainConfig {
  ModelKind model_kind = ModelKind::Wgan;
  std::size_t iterations = 4000;
  double learning_rate = 1e-3;
  std::size_t critic_steps_per_gen = 5;
  double clip_lo = -0.01;
  double clip_hi = 0.01;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;

  std::size_t hidden_units = 100;
  std::size_t critic_hidden = 90;
  // Latent dimensionality for the Gaussian-input adversarial models; kept at
  // the data dimension by default.
  std::size_t latent_dim = 513;
  std::size_t vae_latent = 20;
  std::size_t nmf_rank = 100;

  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  double init_weight_std = 0.01;
  // Non-saturating generator loss for the standard adversarial game; set to
  // false for the literal minimax form.
  bool gan_nonsaturating = true;
  std::size_t telemetry_every = 10;

  void validate() const;  // throws ConfigError
};

struct TrainedSourceModel {
  ModelKind kind = ModelKind::Wgan;
  std::variant<GeneratorParams, VaeParams, NmfParams> model;
  std::optional<CriticParams> critic;

  // (iteration, loss); loss is the per-frame training objective of the kind
  // (KL for nmf/ml_ae, negative ELBO for vae, discriminator loss for gan,
  // negative critic objective for wgan variants).
  std::vector<std::pair<std::size_t, double>> loss_curve;
  // vae only: the per-frame KL(q || prior) term at the same iterations.
  std::vector<std::pair<std::size_t, double>> aux_curve;

  std::size_t critic_steps = 0;
  std::size_t generator_steps = 0;
  std::uint64_t seed = 0;
  TrainConfig config;

  const GeneratorParams& generator() const {
    return std::get<GeneratorParams>(model);
  }
  const VaeParams& vae() const { return std::get<VaeParams>(model); }
  const NmfParams& nmf() const { return std::get<NmfParams>(model); }
};

// Observation points for tests and acceptance checks; both optional.
struct TrainHooks {
  // Invoked after every critic optimizer step (post-clip for wgan kinds).
  std::function<void(const CriticParams&)> after_critic_step;
  // Invoked once per training iteration with the iteration index.
  std::function<void(std::size_t)> after_iteration;
};

// i.i.d. standard-normal latent batch, dim x batch.
Mat sample_latent(std::size_t batch, std::size_t dim, Rng& rng);

TrainedSourceModel train_wgan(const Mat& frames, const TrainConfig& cfg,
                              const TrainHooks& hooks = {});
TrainedSourceModel train_gan(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks = {});
TrainedSourceModel train_ml_autoencoder(const Mat& frames,
                                        const TrainConfig& cfg,
                                        const TrainHooks& hooks = {});
TrainedSourceModel train_vae(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks = {});
TrainedSourceModel train_nmf(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks = {});

// Dispatch on cfg.model_kind.
TrainedSourceModel train_source_model(const Mat& frames, const TrainConfig& cfg,
                                      const TrainHooks& hooks = {});

}  // namespace gensep
