#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gensep/errors.hpp"
#include "gensep/models.hpp"
#include "gensep/rng.hpp"
#include "gensep/training.hpp"

using namespace gensep;

namespace {

// Frames drawn around two fixed spectral templates, non-negative.
Mat toy_frames(std::size_t dim, std::size_t count, std::uint64_t seed,
               double scale = 1.0) {
  Rng rng(seed);
  Mat t1(dim, 1), t2(dim, 1);
  for (std::size_t i = 0; i < dim; ++i) {
    t1(i, 0) = i < dim / 2 ? 2.0 : 0.05;
    t2(i, 0) = i < dim / 2 ? 0.05 : 2.0;
  }
  Mat frames(dim, count);
  for (std::size_t j = 0; j < count; ++j) {
    const double a = rng.uniform(0.3, 1.5) * scale;
    const double b = rng.uniform(0.3, 1.5) * scale;
    const bool first = rng.uniform() < 0.5;
    for (std::size_t i = 0; i < dim; ++i) {
      frames(i, j) = (first ? a * t1(i, 0) : b * t2(i, 0)) +
                     rng.uniform(0.0, 0.05);
    }
  }
  return frames;
}

TrainConfig small_config(ModelKind kind, std::size_t iterations) {
  TrainConfig cfg;
  cfg.model_kind = kind;
  cfg.iterations = iterations;
  cfg.batch_size = 16;
  cfg.hidden_units = 8;
  cfg.critic_hidden = 6;
  cfg.latent_dim = 12;
  cfg.vae_latent = 3;
  cfg.nmf_rank = 4;
  cfg.seed = 1234;
  return cfg;
}

double mean_poisson_to_target(const TrainedSourceModel& m, const Mat& target,
                              std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t dim = m.config.model_kind == ModelKind::AeWgan
                              ? target.rows()
                              : m.config.latent_dim;
  Mat h = sample_latent(samples, dim, rng);
  Mat out = generator_forward(m.generator(), h).first;
  double acc = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    acc += poisson_loss(target, out.col(j));
  }
  return acc / static_cast<double>(samples);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("sample_latent shape, determinism, and moments") {
  Rng a(5), b(5);
  Mat la = sample_latent(7, 4, a);
  Mat lb = sample_latent(7, 4, b);
  CHECK(la.rows() == 4);
  CHECK(la.cols() == 7);
  for (std::size_t k = 0; k < la.size(); ++k) CHECK(la[k] == lb[k]);

  Rng big(6);
  Mat l = sample_latent(100000, 1, big);
  const double mean = l.sum() / 100000.0;
  double var = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) var += (l[k] - mean) * (l[k] - mean);
  var /= 100000.0;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("training config validation") {
  TrainConfig cfg = small_config(ModelKind::Wgan, 10);
  cfg.clip_lo = 0.01;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(ModelKind::Wgan, 0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(ModelKind::Wgan, 10);
  cfg.rmsprop_decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("trainers reject empty or undersized data") {
  TrainConfig cfg = small_config(ModelKind::Wgan, 5);
  Mat empty;
  CHECK_THROWS_AS(train_wgan(empty, cfg), InputError);
  Mat tiny = toy_frames(12, 4, 9);  // fewer than batch_size
  CHECK_THROWS_AS(train_wgan(tiny, cfg), InputError);
  cfg.model_kind = ModelKind::MlAe;
  CHECK_THROWS_AS(train_ml_autoencoder(tiny, cfg), InputError);
}

TEST_CASE("trainers enforce the kind they implement") {
  TrainConfig cfg = small_config(ModelKind::Nmf, 5);
  Mat frames = toy_frames(12, 40, 10);
  CHECK_THROWS_AS(train_wgan(frames, cfg), ConfigError);
  CHECK_THROWS_AS(train_gan(frames, cfg), ConfigError);
  CHECK_THROWS_AS(train_vae(frames, cfg), ConfigError);
  cfg.model_kind = ModelKind::Wgan;
  CHECK_THROWS_AS(train_nmf(frames, cfg), ConfigError);
}

TEST_CASE("wgan keeps every post-step critic parameter inside the clip box") {
  Mat frames = toy_frames(12, 60, 11);
  TrainConfig cfg = small_config(ModelKind::Wgan, 40);
  std::size_t observed = 0;
  TrainHooks hooks;
  hooks.after_critic_step = [&](const CriticParams& c) {
    ++observed;
    for (const Mat* m : {&c.v1, &c.c1, &c.v2, &c.c2}) {
      CHECK(m->min() >= cfg.clip_lo);
      CHECK(m->max() <= cfg.clip_hi);
    }
  };
  TrainedSourceModel m = train_wgan(frames, cfg, hooks);
  CHECK(observed == 40 * 5);
  CHECK(m.critic.has_value());
  CHECK(m.critic->output_kind == CriticOutput::Identity);
}

TEST_CASE("adversarial schedule runs five critic steps per generator step") {
  Mat frames = toy_frames(12, 60, 12);
  TrainConfig cfg = small_config(ModelKind::Wgan, 25);
  TrainedSourceModel m = train_wgan(frames, cfg);
  CHECK(m.critic_steps == 5 * m.generator_steps);
  CHECK(m.generator_steps == 25);

  cfg.model_kind = ModelKind::Gan;
  TrainedSourceModel g = train_gan(frames, cfg);
  CHECK(g.critic_steps == 5 * g.generator_steps);
  CHECK(g.critic->output_kind == CriticOutput::Sigmoid);
}

TEST_CASE("wgan collapses toward a single repeated frame") {
  // one-point target distribution: the generator's fit to it must improve
  const std::size_t dim = 10;
  Mat target(dim, 1);
  for (std::size_t i = 0; i < dim; ++i) target(i, 0) = 0.3 + 0.2 * (i % 4);
  Mat frames(dim, 32);
  for (std::size_t j = 0; j < 32; ++j) {
    for (std::size_t i = 0; i < dim; ++i) frames(i, j) = target(i, 0);
  }
  TrainConfig cfg = small_config(ModelKind::Wgan, 600);
  cfg.latent_dim = 10;
  TrainedSourceModel before = train_wgan(frames, [&] {
    TrainConfig c = cfg;
    c.iterations = 1;
    return c;
  }());
  TrainedSourceModel after = train_wgan(frames, cfg);
  const double kl_before = mean_poisson_to_target(before, target, 64, 99);
  const double kl_after = mean_poisson_to_target(after, target, 64, 99);
  CHECK(kl_after < kl_before);
}

TEST_CASE("ae_wgan feeds data frames to the generator") {
  Mat frames = toy_frames(12, 60, 13);
  TrainConfig cfg = small_config(ModelKind::AeWgan, 20);
  TrainedSourceModel m = train_wgan(frames, cfg);
  // generator input dimension equals the data dimension, not latent_dim
  CHECK(m.generator().input_dim() == 12);
  CHECK(m.critic.has_value());
}

TEST_CASE("standard gan discriminator improves early on separable data") {
  // magnitudes far above the generator's initial output so the
  // discriminator wins the early race
  Mat frames = toy_frames(12, 80, 14, 5.0);
  TrainConfig cfg = small_config(ModelKind::Gan, 120);
  cfg.telemetry_every = 10;
  TrainedSourceModel m = train_gan(frames, cfg);
  REQUIRE(m.loss_curve.size() >= 8);
  std::vector<double> early, late;
  for (std::size_t i = 0; i < 4; ++i) early.push_back(m.loss_curve[i].second);
  for (std::size_t i = m.loss_curve.size() - 4; i < m.loss_curve.size(); ++i) {
    late.push_back(m.loss_curve[i].second);
  }
  CHECK(median_of(late) < median_of(early));
}

TEST_CASE("ml autoencoder loss is non-negative and trends down") {
  Mat frames = toy_frames(12, 80, 15);
  TrainConfig cfg = small_config(ModelKind::MlAe, 600);
  cfg.telemetry_every = 10;
  TrainedSourceModel m = train_ml_autoencoder(frames, cfg);
  std::vector<double> first_half, second_half;
  for (std::size_t i = 0; i < m.loss_curve.size(); ++i) {
    CHECK(m.loss_curve[i].second >= 0.0);
    (i < m.loss_curve.size() / 2 ? first_half : second_half)
        .push_back(m.loss_curve[i].second);
  }
  CHECK(median_of(second_half) < median_of(first_half));
}

TEST_CASE("vae objective stays finite, kl term stays non-negative") {
  Mat frames = toy_frames(12, 80, 16);
  TrainConfig cfg = small_config(ModelKind::Vae, 400);
  cfg.telemetry_every = 5;
  TrainedSourceModel m = train_vae(frames, cfg);
  REQUIRE(!m.loss_curve.empty());
  REQUIRE(m.aux_curve.size() == m.loss_curve.size());
  std::vector<double> first_half, second_half;
  for (std::size_t i = 0; i < m.loss_curve.size(); ++i) {
    CHECK(std::isfinite(m.loss_curve[i].second));
    CHECK(m.aux_curve[i].second >= 0.0);
    (i < m.loss_curve.size() / 2 ? first_half : second_half)
        .push_back(-m.loss_curve[i].second);  // back to ELBO
  }
  // smoothed ELBO rises
  CHECK(median_of(second_half) > median_of(first_half));
}

TEST_CASE("nmf training is monotone and exact on rank-1 data") {
  Rng rng(17);
  Mat w_true = Mat::rand_uniform(10, 1, 0.2, 1.0, rng);
  Mat h_true = Mat::rand_uniform(1, 30, 0.2, 1.0, rng);
  Mat v = matmul(w_true, h_true);

  TrainConfig cfg = small_config(ModelKind::Nmf, 1000);
  cfg.telemetry_every = 1;
  TrainedSourceModel m = train_nmf(v, cfg);
  for (std::size_t i = 1; i < m.loss_curve.size(); ++i) {
    CHECK(m.loss_curve[i].second <= m.loss_curve[i - 1].second + 1e-9);
  }
  CHECK(m.loss_curve.back().second < 1e-6);
  CHECK(m.nmf().w.min() >= 0.0);
  CHECK(m.nmf().w.cols() == cfg.nmf_rank);
}

TEST_CASE("training is bitwise deterministic given (data, config, seed)") {
  Mat frames = toy_frames(12, 60, 18);
  for (ModelKind kind : {ModelKind::Wgan, ModelKind::Gan, ModelKind::MlAe,
                         ModelKind::Vae, ModelKind::Nmf}) {
    TrainConfig cfg = small_config(kind, 30);
    TrainedSourceModel a = train_source_model(frames, cfg);
    TrainedSourceModel b = train_source_model(frames, cfg);
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
      CHECK(a.loss_curve[i].second == b.loss_curve[i].second);
    }
    if (kind == ModelKind::Nmf) {
      for (std::size_t k = 0; k < a.nmf().w.size(); ++k) {
        CHECK(a.nmf().w[k] == b.nmf().w[k]);
      }
    } else if (kind == ModelKind::Vae) {
      for (std::size_t k = 0; k < a.vae().dec_w3.size(); ++k) {
        CHECK(a.vae().dec_w3[k] == b.vae().dec_w3[k]);
      }
    } else {
      for (std::size_t k = 0; k < a.generator().w1.size(); ++k) {
        CHECK(a.generator().w1[k] == b.generator().w1[k]);
      }
    }
  }
}

TEST_SUITE_END();
