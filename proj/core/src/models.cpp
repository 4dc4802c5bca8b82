#include "gensep/models.hpp"

#include <cmath>

#include "gensep/errors.hpp"

namespace gensep {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Nmf: return "nmf";
    case ModelKind::MlAe: return "ml_ae";
    case ModelKind::Vae: return "vae";
    case ModelKind::Gan: return "gan";
    case ModelKind::Wgan: return "wgan";
    case ModelKind::AeWgan: return "ae_wgan";
  }
  throw ConfigError("to_string: unknown model kind");
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "nmf") return ModelKind::Nmf;
  if (name == "ml_ae") return ModelKind::MlAe;
  if (name == "vae") return ModelKind::Vae;
  if (name == "gan") return ModelKind::Gan;
  if (name == "wgan") return ModelKind::Wgan;
  if (name == "ae_wgan") return ModelKind::AeWgan;
  throw ConfigError("unknown model kind: " + name);
}

bool has_critic(ModelKind kind) {
  return kind == ModelKind::Gan || kind == ModelKind::Wgan ||
         kind == ModelKind::AeWgan;
}

// ---------------------------------------------------------------------------

std::pair<Mat, GeneratorCache> generator_forward(const GeneratorParams& p,
                                                 const Mat& h) {
  if (h.rows() != p.input_dim()) {
    throw DimensionError("generator_forward: latent rows != input dim");
  }
  GeneratorCache c;
  c.input = h;
  c.z1 = matmul(p.w1, h);
  add_col_broadcast(c.z1, p.b1);
  c.a1 = softplus(c.z1);
  c.z2 = matmul(p.w2, c.a1);
  add_col_broadcast(c.z2, p.b2);
  c.out = softplus(c.z2);
  return {c.out, c};
}

GeneratorGrads generator_backward(const GeneratorParams& p,
                                  const GeneratorCache& cache,
                                  const Mat& upstream) {
  if (cache.z1.rows() != p.hidden_dim() ||
      cache.input.rows() != p.input_dim() ||
      !upstream.same_shape(cache.out)) {
    throw DimensionError("generator_backward: cache does not match params");
  }
  GeneratorGrads g;
  // softplus' = sigmoid, evaluated at the pre-activations
  Mat dz2 = hadamard(upstream, activation_grads(cache.z2, Activation::Softplus));
  g.w2 = matmul_nt(dz2, cache.a1);
  g.b2 = dz2.row_sums();
  Mat da1 = matmul_tn(p.w2, dz2);
  Mat dz1 = hadamard(da1, activation_grads(cache.z1, Activation::Softplus));
  g.w1 = matmul_nt(dz1, cache.input);
  g.b1 = dz1.row_sums();
  g.input = matmul_tn(p.w1, dz1);
  return g;
}

Mat generator_backward_input(const GeneratorParams& p,
                             const GeneratorCache& cache, const Mat& upstream) {
  if (cache.z1.rows() != p.hidden_dim() ||
      cache.input.rows() != p.input_dim() ||
      !upstream.same_shape(cache.out)) {
    throw DimensionError("generator_backward_input: cache does not match params");
  }
  Mat dz2 = hadamard(upstream, activation_grads(cache.z2, Activation::Softplus));
  Mat da1 = matmul_tn(p.w2, dz2);
  Mat dz1 = hadamard(da1, activation_grads(cache.z1, Activation::Softplus));
  return matmul_tn(p.w1, dz1);
}

// ---------------------------------------------------------------------------

std::pair<Mat, CriticCache> critic_forward(const CriticParams& p, const Mat& s) {
  if (s.rows() != p.input_dim()) {
    throw DimensionError("critic_forward: frame rows != input dim");
  }
  CriticCache c;
  c.input = s;
  c.z1 = matmul(p.v1, s);
  add_col_broadcast(c.z1, p.c1);
  c.a1 = apply_activation(c.z1, Activation::Tanh);
  c.z2 = matmul(p.v2, c.a1);
  add_col_broadcast(c.z2, p.c2);
  c.out = apply_activation(c.z2, p.output_kind == CriticOutput::Sigmoid
                                     ? Activation::Sigmoid
                                     : Activation::Identity);
  return {c.out, c};
}

CriticGrads critic_backward(const CriticParams& p, const CriticCache& cache,
                            const Mat& upstream) {
  if (cache.z1.rows() != p.hidden_dim() ||
      cache.input.rows() != p.input_dim() ||
      !upstream.same_shape(cache.out)) {
    throw DimensionError("critic_backward: cache does not match params");
  }
  CriticGrads g;
  Mat dz2 = hadamard(
      upstream,
      activation_grads(cache.z2, p.output_kind == CriticOutput::Sigmoid
                                     ? Activation::Sigmoid
                                     : Activation::Identity));
  g.v2 = matmul_nt(dz2, cache.a1);
  g.c2 = dz2.row_sums();
  Mat da1 = matmul_tn(p.v2, dz2);
  Mat dz1 = hadamard(da1, activation_grads(cache.z1, Activation::Tanh));
  g.v1 = matmul_nt(dz1, cache.input);
  g.c1 = dz1.row_sums();
  g.input = matmul_tn(p.v1, dz1);
  return g;
}

Mat critic_backward_input(const CriticParams& p, const CriticCache& cache,
                          const Mat& upstream) {
  if (cache.z1.rows() != p.hidden_dim() ||
      cache.input.rows() != p.input_dim() ||
      !upstream.same_shape(cache.out)) {
    throw DimensionError("critic_backward_input: cache does not match params");
  }
  Mat dz2 = hadamard(
      upstream,
      activation_grads(cache.z2, p.output_kind == CriticOutput::Sigmoid
                                     ? Activation::Sigmoid
                                     : Activation::Identity));
  Mat da1 = matmul_tn(p.v2, dz2);
  Mat dz1 = hadamard(da1, activation_grads(cache.z1, Activation::Tanh));
  return matmul_tn(p.v1, dz1);
}

// ---------------------------------------------------------------------------

PoissonFit poisson_fit(const Mat& target, const Mat& rate) {
  if (!target.same_shape(rate)) {
    throw DimensionError("poisson_fit: target/rate shape mismatch");
  }
  PoissonFit r;
  r.grad_rate = Mat(rate.rows(), rate.cols());
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double t = target[k];
    if (t < 0.0) throw InputError("poisson_fit: negative target entry");
    const double lam = std::max(rate[k], kRateFloor);
    loss += lam - t;
    if (t > 0.0) loss += t * std::log(t / lam);
    r.grad_rate[k] = 1.0 - t / lam;
  }
  r.loss = loss;
  return r;
}

double poisson_loss(const Mat& target, const Mat& rate) {
  if (!target.same_shape(rate)) {
    throw DimensionError("poisson_loss: target/rate shape mismatch");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double t = target[k];
    if (t < 0.0) throw InputError("poisson_loss: negative target entry");
    const double lam = std::max(rate[k], kRateFloor);
    loss += lam - t;
    if (t > 0.0) loss += t * std::log(t / lam);
  }
  return loss;
}

// ---------------------------------------------------------------------------

namespace {

void require_nonneg(const Mat& m, const char* what) {
  if (m.min() < 0.0) throw InputError(std::string(what) + ": negative entry");
}

// H <- H (.) (W^T (V./WH)) ./ (W^T 1)
void nmf_h_step(const Mat& w, Mat& h, const Mat& v) {
  Mat wh = matmul(w, h);
  Mat ratio = divide_floored(v, wh, kRateFloor);
  Mat numer = matmul_tn(w, ratio);
  // column sums of W, broadcast along T
  Mat col_sums = transpose(w).row_sums();  // rank x 1
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const double denom = std::max(col_sums(i, 0), kRateFloor);
    for (std::size_t j = 0; j < h.cols(); ++j) {
      h(i, j) *= numer(i, j) / denom;
    }
  }
}

// W <- W (.) ((V./WH) H^T) ./ (1 H^T)
void nmf_w_step(Mat& w, const Mat& h, const Mat& v) {
  Mat wh = matmul(w, h);
  Mat ratio = divide_floored(v, wh, kRateFloor);
  Mat numer = matmul_nt(ratio, h);
  Mat row_sums = h.row_sums();  // rank x 1
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double denom = std::max(row_sums(j, 0), kRateFloor);
      w(i, j) *= numer(i, j) / denom;
    }
  }
}

}  // namespace

void nmf_update(NmfParams& params, Mat& h, const Mat& v) {
  if (params.w.rows() != v.rows() || params.w.cols() != h.rows() ||
      h.cols() != v.cols()) {
    throw DimensionError("nmf_update: W/H/V shapes inconsistent");
  }
  require_nonneg(params.w, "nmf_update W");
  require_nonneg(h, "nmf_update H");
  require_nonneg(v, "nmf_update V");
  nmf_h_step(params.w, h, v);
  nmf_w_step(params.w, h, v);
}

void nmf_update_h(const NmfParams& params, Mat& h, const Mat& v) {
  if (params.w.rows() != v.rows() || params.w.cols() != h.rows() ||
      h.cols() != v.cols()) {
    throw DimensionError("nmf_update_h: W/H/V shapes inconsistent");
  }
  require_nonneg(h, "nmf_update_h H");
  require_nonneg(v, "nmf_update_h V");
  nmf_h_step(params.w, h, v);
}

// ---------------------------------------------------------------------------

VaeCache vae_forward(const VaeParams& p, const Mat& s, const Mat& noise) {
  if (s.rows() != p.data_dim()) {
    throw DimensionError("vae_forward: frame rows != data dim");
  }
  if (noise.rows() != p.latent_dim() || noise.cols() != s.cols()) {
    throw DimensionError("vae_forward: noise must be latent_dim x T");
  }
  VaeCache c;
  c.input = s;
  c.noise = noise;
  c.enc_z1 = matmul(p.enc_w1, s);
  add_col_broadcast(c.enc_z1, p.enc_b1);
  c.hidden = apply_activation(c.enc_z1, Activation::Relu);
  c.mu = matmul(p.mu_w2, c.hidden);
  add_col_broadcast(c.mu, p.mu_b2);
  c.logvar = matmul(p.logvar_w2, c.hidden);
  add_col_broadcast(c.logvar, p.logvar_b2);
  c.z = Mat(c.mu.rows(), c.mu.cols());
  for (std::size_t k = 0; k < c.z.size(); ++k) {
    c.z[k] = c.mu[k] + std::exp(0.5 * c.logvar[k]) * noise[k];
  }
  c.dec_z = matmul(p.dec_w3, c.z);
  add_col_broadcast(c.dec_z, p.dec_b3);
  c.rate = softplus(c.dec_z);
  return c;
}

std::pair<Mat, Mat> vae_decode(const VaeParams& p, const Mat& z) {
  if (z.rows() != p.latent_dim()) {
    throw DimensionError("vae_decode: latent rows != latent dim");
  }
  Mat dec_z = matmul(p.dec_w3, z);
  add_col_broadcast(dec_z, p.dec_b3);
  return {softplus(dec_z), std::move(dec_z)};
}

Mat vae_decode_backward(const VaeParams& p, const Mat& dec_z,
                        const Mat& upstream) {
  Mat dz = hadamard(upstream, activation_grads(dec_z, Activation::Softplus));
  return matmul_tn(p.dec_w3, dz);
}

VaeElbo vae_elbo(const VaeParams& p, const Mat& s, const Mat& noise) {
  VaeCache c = vae_forward(p, s, noise);
  VaeElbo e;
  e.rate = c.rate;

  PoissonFit fit = poisson_fit(s, c.rate);

  double kl = 0.0;
  for (std::size_t k = 0; k < c.mu.size(); ++k) {
    kl += 0.5 * (std::exp(c.logvar[k]) + c.mu[k] * c.mu[k] - 1.0 - c.logvar[k]);
  }
  e.kl_term = kl;
  e.value = -fit.loss - kl;

  // d value / d rate = -(1 - s/rate); chain through the softplus decoder
  Mat drate = fit.grad_rate;
  drate *= -1.0;
  Mat ddec_z = hadamard(drate, activation_grads(c.dec_z, Activation::Softplus));
  e.grads.dec_w3 = matmul_nt(ddec_z, c.z);
  e.grads.dec_b3 = ddec_z.row_sums();
  Mat dz = matmul_tn(p.dec_w3, ddec_z);

  // z = mu + exp(logvar/2) (.) noise, plus the -KL contribution
  Mat dmu = dz;
  Mat dlogvar(dz.rows(), dz.cols());
  for (std::size_t k = 0; k < dz.size(); ++k) {
    dlogvar[k] = dz[k] * 0.5 * std::exp(0.5 * c.logvar[k]) * c.noise[k] -
                 0.5 * (std::exp(c.logvar[k]) - 1.0);
    dmu[k] -= c.mu[k];
  }

  e.grads.mu_w2 = matmul_nt(dmu, c.hidden);
  e.grads.mu_b2 = dmu.row_sums();
  e.grads.logvar_w2 = matmul_nt(dlogvar, c.hidden);
  e.grads.logvar_b2 = dlogvar.row_sums();

  Mat dhidden = matmul_tn(p.mu_w2, dmu) + matmul_tn(p.logvar_w2, dlogvar);
  Mat denc_z1 =
      hadamard(dhidden, activation_grads(c.enc_z1, Activation::Relu));
  e.grads.enc_w1 = matmul_nt(denc_z1, c.input);
  e.grads.enc_b1 = denc_z1.row_sums();
  return e;
}

// ---------------------------------------------------------------------------

GeneratorParams init_generator(std::size_t in, std::size_t hidden,
                               std::size_t out, double stddev, Rng& rng) {
  GeneratorParams p;
  p.w1 = Mat::randn(hidden, in, stddev, rng);
  p.b1 = Mat(hidden, 1);
  p.w2 = Mat::randn(out, hidden, stddev, rng);
  p.b2 = Mat(out, 1);
  return p;
}

CriticParams init_critic(std::size_t in, std::size_t hidden, CriticOutput kind,
                         double stddev, Rng& rng) {
  CriticParams p;
  p.v1 = Mat::randn(hidden, in, stddev, rng);
  p.c1 = Mat(hidden, 1);
  p.v2 = Mat::randn(1, hidden, stddev, rng);
  p.c2 = Mat(1, 1);
  p.output_kind = kind;
  return p;
}

VaeParams init_vae(std::size_t data, std::size_t hidden, std::size_t latent,
                   double stddev, Rng& rng) {
  VaeParams p;
  p.enc_w1 = Mat::randn(hidden, data, stddev, rng);
  p.enc_b1 = Mat(hidden, 1);
  p.mu_w2 = Mat::randn(latent, hidden, stddev, rng);
  p.mu_b2 = Mat(latent, 1);
  p.logvar_w2 = Mat::randn(latent, hidden, stddev, rng);
  p.logvar_b2 = Mat(latent, 1);
  p.dec_w3 = Mat::randn(data, latent, stddev, rng);
  p.dec_b3 = Mat(data, 1);
  return p;
}

NmfParams init_nmf(std::size_t data, std::size_t rank, Rng& rng) {
  NmfParams p;
  p.w = Mat::rand_uniform(data, rank, 0.1, 1.0, rng);
  return p;
}

}  // namespace gensep
