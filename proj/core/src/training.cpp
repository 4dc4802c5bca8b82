#include "gensep/training.hpp"

#include <cmath>
#include <string>

#include "gensep/errors.hpp"
#include "gensep/optim.hpp"

namespace gensep {

void TrainConfig::validate() const {
  if (iterations == 0) throw ConfigError("train: iterations must be positive");
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (learning_rate <= 0.0) throw ConfigError("train: learning_rate <= 0");
  if (critic_steps_per_gen == 0) {
    throw ConfigError("train: critic_steps_per_gen must be positive");
  }
  if (!(clip_lo < 0.0 && 0.0 < clip_hi)) {
    throw ConfigError("train: need clip_lo < 0 < clip_hi");
  }
  if (hidden_units == 0 || critic_hidden == 0 || latent_dim == 0 ||
      vae_latent == 0 || nmf_rank == 0) {
    throw ConfigError("train: layer sizes must be positive");
  }
  if (rmsprop_decay <= 0.0 || rmsprop_decay >= 1.0) {
    throw ConfigError("train: rmsprop_decay must lie in (0,1)");
  }
  if (rmsprop_epsilon <= 0.0) throw ConfigError("train: rmsprop_epsilon <= 0");
  if (telemetry_every == 0) throw ConfigError("train: telemetry_every == 0");
}

Mat sample_latent(std::size_t batch, std::size_t dim, Rng& rng) {
  if (batch == 0 || dim == 0) {
    throw ConfigError("sample_latent: dimensions must be positive");
  }
  return Mat::randn(dim, batch, 1.0, rng);
}

namespace {

Mat sample_columns(const Mat& data, std::size_t batch, Rng& rng) {
  Mat out(data.rows(), batch);
  for (std::size_t j = 0; j < batch; ++j) {
    const std::size_t src = rng.index(data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) out(i, j) = data(i, src);
  }
  return out;
}

void require_training_data(const Mat& frames, const TrainConfig& cfg,
                           bool batched) {
  if (frames.empty()) throw InputError("train: empty training data");
  if (frames.min() < 0.0) throw InputError("train: negative magnitude frame");
  if (batched && frames.cols() < cfg.batch_size) {
    throw InputError("train: fewer frames than batch_size (" +
                     std::to_string(frames.cols()) + " < " +
                     std::to_string(cfg.batch_size) + ")");
  }
}

void check_finite(std::initializer_list<const Mat*> mats, std::size_t iteration) {
  for (const Mat* m : mats) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m->size(); ++k) acc += (*m)[k];
    if (!std::isfinite(acc)) {
      throw NumericalError("train: non-finite parameter at iteration " +
                           std::to_string(iteration));
    }
  }
}

struct GeneratorOptim {
  RmspropState w1, b1, w2, b2;
  GeneratorOptim(const GeneratorParams& p, const TrainConfig& c)
      : w1(p.w1.rows(), p.w1.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        b1(p.b1.rows(), p.b1.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        w2(p.w2.rows(), p.w2.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        b2(p.b2.rows(), p.b2.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon) {}

  void step(GeneratorParams& p, const GeneratorGrads& g, Direction dir) {
    rmsprop_step(p.w1, g.w1, w1, dir);
    rmsprop_step(p.b1, g.b1, b1, dir);
    rmsprop_step(p.w2, g.w2, w2, dir);
    rmsprop_step(p.b2, g.b2, b2, dir);
  }
};

struct CriticOptim {
  RmspropState v1, c1, v2, c2;
  CriticOptim(const CriticParams& p, const TrainConfig& c)
      : v1(p.v1.rows(), p.v1.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        c1(p.c1.rows(), p.c1.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        v2(p.v2.rows(), p.v2.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon),
        c2(p.c2.rows(), p.c2.cols(), c.learning_rate, c.rmsprop_decay,
           c.rmsprop_epsilon) {}

  void step(CriticParams& p, const CriticGrads& g, Direction dir) {
    rmsprop_step(p.v1, g.v1, v1, dir);
    rmsprop_step(p.c1, g.c1, c1, dir);
    rmsprop_step(p.v2, g.v2, v2, dir);
    rmsprop_step(p.c2, g.c2, c2, dir);
  }
};

void accumulate(CriticGrads& into, const CriticGrads& other) {
  into.v1 += other.v1;
  into.c1 += other.c1;
  into.v2 += other.v2;
  into.c2 += other.c2;
}

void clip_critic(CriticParams& p, const TrainConfig& cfg) {
  clip_inplace(p.v1, cfg.clip_lo, cfg.clip_hi);
  clip_inplace(p.c1, cfg.clip_lo, cfg.clip_hi);
  clip_inplace(p.v2, cfg.clip_lo, cfg.clip_hi);
  clip_inplace(p.c2, cfg.clip_lo, cfg.clip_hi);
}

constexpr double kProbFloor = 1e-12;

// d/dD of sum(log D)/B, clamped away from log(0).
Mat log_score_upstream(const Mat& scores, double scale) {
  Mat up(scores.rows(), scores.cols());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    up[k] = scale / std::max(scores[k], kProbFloor);
  }
  return up;
}

// d/dD of sum(log(1 - D))/B.
Mat log_one_minus_upstream(const Mat& scores, double scale) {
  Mat up(scores.rows(), scores.cols());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    up[k] = -scale / std::max(1.0 - scores[k], kProbFloor);
  }
  return up;
}

double mean_log(const Mat& scores) {
  double acc = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    acc += std::log(std::max(scores[k], kProbFloor));
  }
  return acc / static_cast<double>(scores.size());
}

double mean_log_one_minus(const Mat& scores) {
  double acc = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    acc += std::log(std::max(1.0 - scores[k], kProbFloor));
  }
  return acc / static_cast<double>(scores.size());
}

// Shared loop for the two adversarial games. The only differences are the
// critic head, the score transforms, and weight clipping.
TrainedSourceModel train_adversarial(const Mat& frames, const TrainConfig& cfg,
                                     const TrainHooks& hooks, bool wasserstein) {
  cfg.validate();
  require_training_data(frames, cfg, true);

  const std::size_t data_dim = frames.rows();
  const bool autoencoding = cfg.model_kind == ModelKind::AeWgan;
  const std::size_t gen_input = autoencoding ? data_dim : cfg.latent_dim;
  const std::size_t batch = cfg.batch_size;

  Rng rng(cfg.seed);
  GeneratorParams gen = init_generator(gen_input, cfg.hidden_units, data_dim,
                                       cfg.init_weight_std, rng);
  CriticParams critic = init_critic(
      data_dim, cfg.critic_hidden,
      wasserstein ? CriticOutput::Identity : CriticOutput::Sigmoid,
      cfg.init_weight_std, rng);

  GeneratorOptim gen_opt(gen, cfg);
  CriticOptim critic_opt(critic, cfg);

  TrainedSourceModel result;
  result.kind = cfg.model_kind;
  result.seed = cfg.seed;
  result.config = cfg;

  auto generator_input = [&]() {
    return autoencoding ? sample_columns(frames, batch, rng)
                        : sample_latent(batch, cfg.latent_dim, rng);
  };

  const double inv_b = 1.0 / static_cast<double>(batch);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    double critic_objective = 0.0;
    for (std::size_t cs = 0; cs < cfg.critic_steps_per_gen; ++cs) {
      Mat real = sample_columns(frames, batch, rng);
      Mat fake = generator_forward(gen, generator_input()).first;
      auto [real_scores, real_cache] = critic_forward(critic, real);
      auto [fake_scores, fake_cache] = critic_forward(critic, fake);

      CriticGrads grads;
      if (wasserstein) {
        // maximize E_s D(s) - E_h D(f(h))
        grads = critic_backward(critic, real_cache, Mat(1, batch, inv_b));
        accumulate(grads,
                   critic_backward(critic, fake_cache, Mat(1, batch, -inv_b)));
        critic_objective = real_scores.sum() * inv_b - fake_scores.sum() * inv_b;
      } else {
        // maximize E_s log D(s) + E_h log(1 - D(f(h)))
        grads = critic_backward(critic, real_cache,
                                log_score_upstream(real_scores, inv_b));
        accumulate(grads,
                   critic_backward(critic, fake_cache,
                                   log_one_minus_upstream(fake_scores, inv_b)));
        critic_objective =
            mean_log(real_scores) + mean_log_one_minus(fake_scores);
      }
      critic_opt.step(critic, grads, Direction::Maximize);
      if (wasserstein) clip_critic(critic, cfg);
      ++result.critic_steps;
      if (hooks.after_critic_step) hooks.after_critic_step(critic);
    }

    // generator step
    {
      auto [fake, gen_cache] = generator_forward(gen, generator_input());
      auto [scores, critic_cache] = critic_forward(critic, fake);
      Mat upstream;
      Direction dir = Direction::Maximize;
      if (wasserstein) {
        upstream = Mat(1, batch, inv_b);  // maximize E D(f(h))
      } else if (cfg.gan_nonsaturating) {
        upstream = log_score_upstream(scores, inv_b);  // maximize E log D
      } else {
        // literal minimax: minimize E log(1 - D(f(h)))
        upstream = log_one_minus_upstream(scores, inv_b);
        dir = Direction::Minimize;
      }
      Mat into_generator = critic_backward(critic, critic_cache, upstream).input;
      GeneratorGrads gg = generator_backward(gen, gen_cache, into_generator);
      gen_opt.step(gen, gg, dir);
      ++result.generator_steps;
    }

    check_finite({&gen.w1, &gen.b1, &gen.w2, &gen.b2, &critic.v1, &critic.c1,
                  &critic.v2, &critic.c2},
                 it);
    if (it % cfg.telemetry_every == 0 || it + 1 == cfg.iterations) {
      result.loss_curve.emplace_back(it, -critic_objective);
    }
    if (hooks.after_iteration) hooks.after_iteration(it);
  }

  result.model = std::move(gen);
  result.critic = std::move(critic);
  return result;
}

}  // namespace

TrainedSourceModel train_wgan(const Mat& frames, const TrainConfig& cfg,
                              const TrainHooks& hooks) {
  if (cfg.model_kind != ModelKind::Wgan && cfg.model_kind != ModelKind::AeWgan) {
    throw ConfigError("train_wgan: model_kind must be wgan or ae_wgan");
  }
  return train_adversarial(frames, cfg, hooks, true);
}

TrainedSourceModel train_gan(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks) {
  if (cfg.model_kind != ModelKind::Gan) {
    throw ConfigError("train_gan: model_kind must be gan");
  }
  return train_adversarial(frames, cfg, hooks, false);
}

TrainedSourceModel train_ml_autoencoder(const Mat& frames,
                                        const TrainConfig& cfg,
                                        const TrainHooks& hooks) {
  if (cfg.model_kind != ModelKind::MlAe) {
    throw ConfigError("train_ml_autoencoder: model_kind must be ml_ae");
  }
  cfg.validate();
  require_training_data(frames, cfg, true);

  const std::size_t data_dim = frames.rows();
  Rng rng(cfg.seed);
  GeneratorParams gen = init_generator(data_dim, cfg.hidden_units, data_dim,
                                       cfg.init_weight_std, rng);
  GeneratorOptim opt(gen, cfg);

  TrainedSourceModel result;
  result.kind = cfg.model_kind;
  result.seed = cfg.seed;
  result.config = cfg;

  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    Mat batch = sample_columns(frames, cfg.batch_size, rng);
    auto [rate, cache] = generator_forward(gen, batch);
    PoissonFit fit = poisson_fit(batch, rate);
    GeneratorGrads g = generator_backward(gen, cache, fit.grad_rate);
    opt.step(gen, g, Direction::Minimize);
    ++result.generator_steps;

    check_finite({&gen.w1, &gen.b1, &gen.w2, &gen.b2}, it);
    if (it % cfg.telemetry_every == 0 || it + 1 == cfg.iterations) {
      result.loss_curve.emplace_back(it, fit.loss * inv_b);
    }
    if (hooks.after_iteration) hooks.after_iteration(it);
  }
  result.model = std::move(gen);
  return result;
}

TrainedSourceModel train_vae(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks) {
  if (cfg.model_kind != ModelKind::Vae) {
    throw ConfigError("train_vae: model_kind must be vae");
  }
  cfg.validate();
  require_training_data(frames, cfg, true);

  const std::size_t data_dim = frames.rows();
  Rng rng(cfg.seed);
  VaeParams vae = init_vae(data_dim, cfg.hidden_units, cfg.vae_latent,
                           cfg.init_weight_std, rng);

  auto make_state = [&](const Mat& m) {
    return RmspropState(m.rows(), m.cols(), cfg.learning_rate,
                        cfg.rmsprop_decay, cfg.rmsprop_epsilon);
  };
  RmspropState st_enc_w1 = make_state(vae.enc_w1), st_enc_b1 = make_state(vae.enc_b1),
               st_mu_w2 = make_state(vae.mu_w2), st_mu_b2 = make_state(vae.mu_b2),
               st_lv_w2 = make_state(vae.logvar_w2), st_lv_b2 = make_state(vae.logvar_b2),
               st_dec_w3 = make_state(vae.dec_w3), st_dec_b3 = make_state(vae.dec_b3);

  TrainedSourceModel result;
  result.kind = cfg.model_kind;
  result.seed = cfg.seed;
  result.config = cfg;

  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    Mat batch = sample_columns(frames, cfg.batch_size, rng);
    Mat noise = Mat::randn(cfg.vae_latent, cfg.batch_size, 1.0, rng);
    VaeElbo e = vae_elbo(vae, batch, noise);
    if (!std::isfinite(e.value)) {
      throw NumericalError("train_vae: non-finite objective at iteration " +
                           std::to_string(it));
    }

    rmsprop_step(vae.enc_w1, e.grads.enc_w1, st_enc_w1, Direction::Maximize);
    rmsprop_step(vae.enc_b1, e.grads.enc_b1, st_enc_b1, Direction::Maximize);
    rmsprop_step(vae.mu_w2, e.grads.mu_w2, st_mu_w2, Direction::Maximize);
    rmsprop_step(vae.mu_b2, e.grads.mu_b2, st_mu_b2, Direction::Maximize);
    rmsprop_step(vae.logvar_w2, e.grads.logvar_w2, st_lv_w2, Direction::Maximize);
    rmsprop_step(vae.logvar_b2, e.grads.logvar_b2, st_lv_b2, Direction::Maximize);
    rmsprop_step(vae.dec_w3, e.grads.dec_w3, st_dec_w3, Direction::Maximize);
    rmsprop_step(vae.dec_b3, e.grads.dec_b3, st_dec_b3, Direction::Maximize);
    ++result.generator_steps;

    check_finite({&vae.enc_w1, &vae.enc_b1, &vae.mu_w2, &vae.mu_b2,
                  &vae.logvar_w2, &vae.logvar_b2, &vae.dec_w3, &vae.dec_b3},
                 it);
    if (it % cfg.telemetry_every == 0 || it + 1 == cfg.iterations) {
      result.loss_curve.emplace_back(it, -e.value * inv_b);
      result.aux_curve.emplace_back(it, e.kl_term * inv_b);
    }
    if (hooks.after_iteration) hooks.after_iteration(it);
  }
  result.model = std::move(vae);
  return result;
}

TrainedSourceModel train_nmf(const Mat& frames, const TrainConfig& cfg,
                             const TrainHooks& hooks) {
  if (cfg.model_kind != ModelKind::Nmf) {
    throw ConfigError("train_nmf: model_kind must be nmf");
  }
  cfg.validate();
  require_training_data(frames, cfg, false);

  Rng rng(cfg.seed);
  NmfParams params = init_nmf(frames.rows(), cfg.nmf_rank, rng);
  Mat h = Mat::rand_uniform(cfg.nmf_rank, frames.cols(), 0.1, 1.0, rng);

  TrainedSourceModel result;
  result.kind = cfg.model_kind;
  result.seed = cfg.seed;
  result.config = cfg;

  const double inv_t = 1.0 / static_cast<double>(frames.cols());
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    nmf_update(params, h, frames);
    ++result.generator_steps;
    check_finite({&params.w, &h}, it);
    if (it % cfg.telemetry_every == 0 || it + 1 == cfg.iterations) {
      result.loss_curve.emplace_back(
          it, poisson_loss(frames, matmul(params.w, h)) * inv_t);
    }
    if (hooks.after_iteration) hooks.after_iteration(it);
  }
  // training H is discarded; the dictionary is the source model
  result.model = std::move(params);
  return result;
}

TrainedSourceModel train_source_model(const Mat& frames, const TrainConfig& cfg,
                                      const TrainHooks& hooks) {
  switch (cfg.model_kind) {
    case ModelKind::Nmf: return train_nmf(frames, cfg, hooks);
    case ModelKind::MlAe: return train_ml_autoencoder(frames, cfg, hooks);
    case ModelKind::Vae: return train_vae(frames, cfg, hooks);
    case ModelKind::Gan: return train_gan(frames, cfg, hooks);
    case ModelKind::Wgan:
    case ModelKind::AeWgan: return train_wgan(frames, cfg, hooks);
  }
  throw ConfigError("train_source_model: unknown model kind");
}

}  // namespace gensep
