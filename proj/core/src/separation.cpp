#include "gensep/separation.hpp"

#include <cmath>
#include <string>
#include <variant>

#include "gensep/errors.hpp"
#include "gensep/optim.hpp"

namespace gensep {

void SeparationConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0) {
    throw ConfigError("separation: alpha and beta must be non-negative");
  }
  if (iterations == 0) throw ConfigError("separation: iterations must be positive");
  if (learning_rate <= 0.0) throw ConfigError("separation: learning_rate <= 0");
  if (rmsprop_decay <= 0.0 || rmsprop_decay >= 1.0) {
    throw ConfigError("separation: rmsprop_decay must lie in (0,1)");
  }
  if (trace_every == 0) throw ConfigError("separation: trace_every == 0");
}

namespace {

constexpr double kScoreFloor = 1e-12;

bool is_differentiable(ModelKind kind) { return kind != ModelKind::Nmf; }

struct ModelForward {
  Mat rate;
  GeneratorCache gen_cache;  // two-layer kinds
  Mat dec_z;                 // vae decoder
};

ModelForward model_forward(const TrainedSourceModel& m, const Mat& h) {
  ModelForward f;
  if (m.kind == ModelKind::Vae) {
    auto [rate, dec_z] = vae_decode(m.vae(), h);
    f.rate = std::move(rate);
    f.dec_z = std::move(dec_z);
  } else {
    auto [rate, cache] = generator_forward(m.generator(), h);
    f.rate = std::move(rate);
    f.gen_cache = std::move(cache);
  }
  return f;
}

Mat model_backward_input(const TrainedSourceModel& m, const ModelForward& f,
                         const Mat& upstream) {
  if (m.kind == ModelKind::Vae) {
    return vae_decode_backward(m.vae(), f.dec_z, upstream);
  }
  return generator_backward_input(m.generator(), f.gen_cache, upstream);
}

std::size_t latent_rows(const TrainedSourceModel& m) {
  return m.kind == ModelKind::Vae ? m.vae().latent_dim()
                                  : m.generator().input_dim();
}

Mat init_latents(const TrainedSourceModel& m, const Mat& mixture, Rng& rng) {
  switch (m.kind) {
    case ModelKind::MlAe:
    case ModelKind::AeWgan:
      // data-dimensional latent: start from the mixture frames themselves
      if (latent_rows(m) != mixture.rows()) {
        throw DimensionError("separate: model data dim != mixture rows");
      }
      return mixture;
    case ModelKind::Vae:
    case ModelKind::Gan:
    case ModelKind::Wgan:
      return Mat::randn(latent_rows(m), mixture.cols(), 1.0, rng);
    case ModelKind::Nmf:
      break;
  }
  throw ConfigError("separate: nmf latents are initialized in nmf_separate");
}

struct Evaluation {
  double value = 0.0;
  Mat grad_h1, grad_h2;
};

// Value and (optionally) latent gradients in one pass; the critic and
// reconstruction forwards are shared between the two.
Evaluation evaluate(const Mat& mixture, const TrainedSourceModel& m1,
                    const TrainedSourceModel& m2, const Mat& h1, const Mat& h2,
                    const SeparationConfig& cfg, bool want_grads) {
  const std::size_t frames = mixture.cols();
  const double inv_t = 1.0 / static_cast<double>(frames);

  const ModelForward f1 = model_forward(m1, h1);
  const ModelForward f2 = model_forward(m2, h2);
  if (!f1.rate.same_shape(mixture) || !f2.rate.same_shape(mixture)) {
    throw DimensionError("separation: estimate shape != mixture shape");
  }

  Evaluation ev;

  // reconstruction: -(1/T) KL(x || r1 + r2)
  Mat total = f1.rate + f2.rate;
  PoissonFit fit = poisson_fit(mixture, total);
  ev.value = -fit.loss * inv_t;

  Mat upstream1, upstream2;
  if (want_grads) {
    upstream1 = fit.grad_rate;
    upstream1 *= -inv_t;
    upstream2 = upstream1;
  }

  // critic score term, on each critic's native scale
  if (cfg.alpha > 0.0) {
    const TrainedSourceModel* models[2] = {&m1, &m2};
    const ModelForward* fwds[2] = {&f1, &f2};
    Mat* upstreams[2] = {&upstream1, &upstream2};
    for (int k = 0; k < 2; ++k) {
      if (!models[k]->critic.has_value()) continue;
      const CriticParams& critic = *models[k]->critic;
      auto [scores, cache] = critic_forward(critic, fwds[k]->rate);
      Mat dscore(1, frames);
      double term = 0.0;
      if (critic.output_kind == CriticOutput::Sigmoid) {
        for (std::size_t t = 0; t < frames; ++t) {
          const double d = std::max(scores(0, t), kScoreFloor);
          term += std::log(d);
          dscore(0, t) = cfg.alpha * inv_t / d;
        }
      } else {
        term = scores.sum();
        for (std::size_t t = 0; t < frames; ++t) {
          dscore(0, t) = cfg.alpha * inv_t;
        }
      }
      ev.value += cfg.alpha * inv_t * term;
      if (want_grads) {
        *upstreams[k] += critic_backward_input(critic, cache, dscore);
      }
    }
  }

  // first-difference smoothness penalty, subtracted from the objective
  if (cfg.beta > 0.0 && frames >= 2) {
    const double w = cfg.beta / static_cast<double>(frames - 1);
    const ModelForward* fwds[2] = {&f1, &f2};
    Mat* upstreams[2] = {&upstream1, &upstream2};
    for (int k = 0; k < 2; ++k) {
      const Mat& r = fwds[k]->rate;
      double l1 = 0.0;
      for (std::size_t i = 0; i < r.rows(); ++i) {
        for (std::size_t t = 0; t + 1 < r.cols(); ++t) {
          const double diff = r(i, t + 1) - r(i, t);
          l1 += std::abs(diff);
          if (want_grads && diff != 0.0) {
            const double s = diff > 0.0 ? w : -w;
            // d(-w*|r_{t+1} - r_t|)/dr
            (*upstreams[k])(i, t + 1) -= s;
            (*upstreams[k])(i, t) += s;
          }
        }
      }
      ev.value -= w * l1;
    }
  }

  if (want_grads) {
    ev.grad_h1 = model_backward_input(m1, f1, upstream1);
    ev.grad_h2 = model_backward_input(m2, f2, upstream2);
  }
  return ev;
}

void require_gradient_kinds(const TrainedSourceModel& m1,
                            const TrainedSourceModel& m2) {
  if (!is_differentiable(m1.kind) || !is_differentiable(m2.kind)) {
    throw ConfigError(
        "separate: nmf models pair only with nmf (got " + to_string(m1.kind) +
        " + " + to_string(m2.kind) + ")");
  }
}

}  // namespace

double separation_objective(const Mat& mixture, const TrainedSourceModel& m1,
                            const TrainedSourceModel& m2, const Mat& h1,
                            const Mat& h2, const SeparationConfig& cfg) {
  cfg.validate();
  require_gradient_kinds(m1, m2);
  return evaluate(mixture, m1, m2, h1, h2, cfg, false).value;
}

std::pair<Mat, Mat> separation_objective_grad(const Mat& mixture,
                                              const TrainedSourceModel& m1,
                                              const TrainedSourceModel& m2,
                                              const Mat& h1, const Mat& h2,
                                              const SeparationConfig& cfg) {
  cfg.validate();
  require_gradient_kinds(m1, m2);
  Evaluation ev = evaluate(mixture, m1, m2, h1, h2, cfg, true);
  return {std::move(ev.grad_h1), std::move(ev.grad_h2)};
}

SeparationResult separate(const Mat& mixture, const TrainedSourceModel& m1,
                          const TrainedSourceModel& m2,
                          const SeparationConfig& cfg) {
  cfg.validate();
  if (mixture.empty()) throw InputError("separate: empty mixture");
  if (mixture.min() < 0.0) throw InputError("separate: negative mixture entry");

  if (m1.kind == ModelKind::Nmf && m2.kind == ModelKind::Nmf) {
    return nmf_separate(mixture, m1, m2, cfg);
  }
  require_gradient_kinds(m1, m2);

  Rng rng(cfg.seed);
  Mat h1 = init_latents(m1, mixture, rng);
  Mat h2 = init_latents(m2, mixture, rng);

  RmspropState st1(h1.rows(), h1.cols(), cfg.learning_rate, cfg.rmsprop_decay,
                   cfg.rmsprop_epsilon);
  RmspropState st2(h2.rows(), h2.cols(), cfg.learning_rate, cfg.rmsprop_decay,
                   cfg.rmsprop_epsilon);

  SeparationResult result;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    Evaluation ev = evaluate(mixture, m1, m2, h1, h2, cfg, true);
    if (!std::isfinite(ev.value)) {
      throw NumericalError("separate: non-finite objective at iteration " +
                           std::to_string(it));
    }
    if (it % cfg.trace_every == 0 || it + 1 == cfg.iterations) {
      result.objective_trace.emplace_back(it, ev.value);
    }
    rmsprop_step(h1, ev.grad_h1, st1, Direction::Maximize);
    rmsprop_step(h2, ev.grad_h2, st2, Direction::Maximize);
  }

  result.s1_hat = model_forward(m1, h1).rate;
  result.s2_hat = model_forward(m2, h2).rate;
  result.h1 = std::move(h1);
  result.h2 = std::move(h2);
  return result;
}

SeparationResult nmf_separate(const Mat& mixture, const TrainedSourceModel& m1,
                              const TrainedSourceModel& m2,
                              const SeparationConfig& cfg) {
  cfg.validate();
  if (mixture.empty()) throw InputError("nmf_separate: empty mixture");
  if (mixture.min() < 0.0) {
    throw InputError("nmf_separate: negative mixture entry");
  }
  if (m1.kind != ModelKind::Nmf || m2.kind != ModelKind::Nmf) {
    throw ConfigError("nmf_separate: both models must be nmf");
  }
  const Mat& w1 = m1.nmf().w;
  const Mat& w2 = m2.nmf().w;
  if (w1.rows() != mixture.rows() || w2.rows() != mixture.rows()) {
    throw DimensionError("nmf_separate: dictionary rows != mixture rows");
  }

  NmfParams stacked;
  stacked.w = hconcat(w1, w2);
  const std::size_t rank1 = w1.cols();
  const std::size_t frames = mixture.cols();
  const double inv_t = 1.0 / static_cast<double>(frames);

  Rng rng(cfg.seed);
  Mat h = Mat::rand_uniform(stacked.w.cols(), frames, 0.1, 1.0, rng);

  SeparationResult result;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    nmf_update_h(stacked, h, mixture);
    if (it % cfg.trace_every == 0 || it + 1 == cfg.iterations) {
      const double kl = poisson_loss(mixture, matmul(stacked.w, h));
      if (!std::isfinite(kl)) {
        throw NumericalError("nmf_separate: non-finite divergence");
      }
      result.objective_trace.emplace_back(it, -kl * inv_t);
    }
  }

  Mat h1(rank1, frames), h2(h.rows() - rank1, frames);
  for (std::size_t j = 0; j < frames; ++j) {
    for (std::size_t i = 0; i < rank1; ++i) h1(i, j) = h(i, j);
    for (std::size_t i = rank1; i < h.rows(); ++i) h2(i - rank1, j) = h(i, j);
  }
  result.s1_hat = matmul(w1, h1);
  result.s2_hat = matmul(w2, h2);
  result.h1 = std::move(h1);
  result.h2 = std::move(h2);
  return result;
}

}  // namespace gensep
