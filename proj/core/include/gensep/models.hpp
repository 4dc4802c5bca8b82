#pragma once

#include <string>
#include <utility>

#include "gensep/mat.hpp"
#include "gensep/rng.hpp"

namespace gensep {

enum class ModelKind { Nmf, MlAe, Vae, Gan, Wgan, AeWgan };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
// Adversarial kinds carry a critic alongside the generator.
bool has_critic(ModelKind kind);

// ---------------------------------------------------------------------------
// Two-layer softplus generator: out = SP(w2 * SP(w1 * h + b1) + b2).
// Also serves as the maximum-likelihood autoencoder (input = data frames).

struct GeneratorParams {
  Mat w1;  // hidden x in
  Mat b1;  // hidden x 1
  Mat w2;  // out x hidden
  Mat b2;  // out x 1

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t output_dim() const { return w2.rows(); }
};

struct GeneratorCache {
  Mat input, z1, a1, z2, out;
};

struct GeneratorGrads {
  Mat w1, b1, w2, b2;
  Mat input;
};

// Returns the strictly positive output batch plus the cache consumed by
// generator_backward.
std::pair<Mat, GeneratorCache> generator_forward(const GeneratorParams& p,
                                                 const Mat& h);
GeneratorGrads generator_backward(const GeneratorParams& p,
                                  const GeneratorCache& cache,
                                  const Mat& upstream);
// Gradient w.r.t. the input batch only; skips the parameter gradients.
Mat generator_backward_input(const GeneratorParams& p,
                             const GeneratorCache& cache, const Mat& upstream);

// ---------------------------------------------------------------------------
// Critic / discriminator: score = sigma(v2 * tanh(v1 * s + c1) + c2) with a
// sigmoid head for the standard adversarial game and an identity head for the
// Wasserstein one.

enum class CriticOutput { Sigmoid, Identity };

struct CriticParams {
  Mat v1;  // hidden x in
  Mat c1;  // hidden x 1
  Mat v2;  // 1 x hidden
  Mat c2;  // 1 x 1
  CriticOutput output_kind = CriticOutput::Identity;

  std::size_t input_dim() const { return v1.cols(); }
  std::size_t hidden_dim() const { return v1.rows(); }
};

struct CriticCache {
  Mat input, z1, a1, z2, out;
};

struct CriticGrads {
  Mat v1, c1, v2, c2;
  Mat input;
};

std::pair<Mat, CriticCache> critic_forward(const CriticParams& p, const Mat& s);
CriticGrads critic_backward(const CriticParams& p, const CriticCache& cache,
                            const Mat& upstream);
Mat critic_backward_input(const CriticParams& p, const CriticCache& cache,
                          const Mat& upstream);

// ---------------------------------------------------------------------------
// Poisson / unnormalized-KL fit shared by every reconstruction term:
//   loss = sum target*log(target/rate) - target + rate,   0*log0 := 0,
// with the rate floored at 1e-12. Gradient is w.r.t. the rate.

inline constexpr double kRateFloor = 1e-12;

struct PoissonFit {
  double loss = 0.0;
  Mat grad_rate;
};

PoissonFit poisson_fit(const Mat& target, const Mat& rate);

// Convenience: loss only.
double poisson_loss(const Mat& target, const Mat& rate);

// ---------------------------------------------------------------------------
// KL-NMF dictionary model.

struct NmfParams {
  Mat w;  // data_dim x rank, non-negative

  std::size_t rank() const { return w.cols(); }
  std::size_t data_dim() const { return w.rows(); }
};

// One full multiplicative alternation (H step then W step) for KL-NMF.
// Non-negativity is preserved and KL(V || WH) never increases.
void nmf_update(NmfParams& params, Mat& h, const Mat& v);

// H-only multiplicative step against a fixed dictionary (test-time use).
void nmf_update_h(const NmfParams& params, Mat& h, const Mat& v);

// ---------------------------------------------------------------------------
// Variational autoencoder: ReLU encoder with linear mean/log-variance heads,
// one-layer softplus decoder emitting a Poisson rate.

struct VaeParams {
  Mat enc_w1, enc_b1;        // hidden x data, hidden x 1
  Mat mu_w2, mu_b2;          // latent x hidden, latent x 1
  Mat logvar_w2, logvar_b2;  // latent x hidden, latent x 1
  Mat dec_w3, dec_b3;        // data x latent, data x 1

  std::size_t data_dim() const { return enc_w1.cols(); }
  std::size_t hidden_dim() const { return enc_w1.rows(); }
  std::size_t latent_dim() const { return mu_w2.rows(); }
};

struct VaeCache {
  Mat input, enc_z1, hidden, mu, logvar, noise, z, dec_z, rate;
};

struct VaeGrads {
  Mat enc_w1, enc_b1, mu_w2, mu_b2, logvar_w2, logvar_b2, dec_w3, dec_b3;
};

// Reparameterized forward pass; the caller supplies the standard-normal
// noise so the op stays deterministic given its inputs.
VaeCache vae_forward(const VaeParams& p, const Mat& s, const Mat& noise);

// Decoder alone: rate = SP(dec_w3 * z + dec_b3). Used at separation time.
std::pair<Mat, Mat> vae_decode(const VaeParams& p, const Mat& z);  // rate, dec_z
Mat vae_decode_backward(const VaeParams& p, const Mat& dec_z,
                        const Mat& upstream);  // gradient w.r.t. z

struct VaeElbo {
  double value = 0.0;      // to be maximized
  double kl_term = 0.0;    // sum_t KL(q(z|s_t) || N(0, I)), >= 0
  VaeGrads grads;          // d value / d params
  Mat rate;
};

// Single-sample evidence lower bound and its parameter gradients.
VaeElbo vae_elbo(const VaeParams& p, const Mat& s, const Mat& noise);

// ---------------------------------------------------------------------------
// Initialization: Normal(0, stddev) weights, zero biases; NMF dictionaries
// Uniform(0.1, 1). Deterministic given the rng.

GeneratorParams init_generator(std::size_t in, std::size_t hidden,
                               std::size_t out, double stddev, Rng& rng);
CriticParams init_critic(std::size_t in, std::size_t hidden, CriticOutput kind,
                         double stddev, Rng& rng);
VaeParams init_vae(std::size_t data, std::size_t hidden, std::size_t latent,
                   double stddev, Rng& rng);
NmfParams init_nmf(std::size_t data, std::size_t rank, Rng& rng);

}  // namespace gensep
