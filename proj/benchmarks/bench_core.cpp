#include <benchmark/benchmark.h>

#include "gensep/corpus.hpp"
#include "gensep/models.hpp"
#include "gensep/rng.hpp"
#include "gensep/spectrogram.hpp"
#include "gensep/training.hpp"

using namespace gensep;

namespace {

void BM_Matmul(benchmark::State& state) {
  Rng rng(1);
  const std::size_t n = state.range(0);
  Mat a = Mat::randn(100, 513, 1.0, rng);
  Mat b = Mat::randn(513, n, 1.0, rng);
  for (auto _ : state) {
    Mat c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * 100 * 513 * n);
}
BENCHMARK(BM_Matmul)->Arg(100)->Arg(190);

void BM_GeneratorForwardBackward(benchmark::State& state) {
  Rng rng(2);
  GeneratorParams p = init_generator(513, 100, 513, 0.01, rng);
  Mat h = Mat::randn(513, state.range(0), 1.0, rng);
  for (auto _ : state) {
    auto [out, cache] = generator_forward(p, h);
    GeneratorGrads g = generator_backward(p, cache, out);
    benchmark::DoNotOptimize(g.w1.data());
  }
}
BENCHMARK(BM_GeneratorForwardBackward)->Arg(100);

void BM_CriticForwardBackward(benchmark::State& state) {
  Rng rng(3);
  CriticParams p = init_critic(513, 90, CriticOutput::Identity, 0.01, rng);
  Mat s = Mat::rand_uniform(513, state.range(0), 0.0, 2.0, rng);
  Mat up(1, state.range(0), 0.01);
  for (auto _ : state) {
    auto [scores, cache] = critic_forward(p, s);
    CriticGrads g = critic_backward(p, cache, up);
    benchmark::DoNotOptimize(g.v1.data());
  }
}
BENCHMARK(BM_CriticForwardBackward)->Arg(100);

void BM_NmfUpdate(benchmark::State& state) {
  Rng rng(4);
  NmfParams p = init_nmf(513, 100, rng);
  Mat h = Mat::rand_uniform(100, state.range(0), 0.1, 1.0, rng);
  Mat v = Mat::rand_uniform(513, state.range(0), 0.0, 2.0, rng);
  for (auto _ : state) {
    nmf_update(p, h, v);
    benchmark::DoNotOptimize(h.data());
  }
}
BENCHMARK(BM_NmfUpdate)->Arg(190)->Arg(1900);

void BM_Stft(benchmark::State& state) {
  Waveform w = synth_source(male_like_profile(), 3.0, 16000.0, 5);
  for (auto _ : state) {
    auto s = stft(w, 1024, 256);
    benchmark::DoNotOptimize(s.re.data());
  }
}
BENCHMARK(BM_Stft);

void BM_WganIteration(benchmark::State& state) {
  // one full adversarial cycle (5 critic + 1 generator step) at paper scale
  Rng rng(6);
  Mat frames = Mat::rand_uniform(513, 1900, 0.0, 3.0, rng);
  TrainConfig cfg;
  cfg.model_kind = ModelKind::Wgan;
  cfg.iterations = 1;
  cfg.batch_size = 100;
  cfg.seed = 9;
  for (auto _ : state) {
    TrainedSourceModel m = train_wgan(frames, cfg);
    benchmark::DoNotOptimize(m.generator_steps);
  }
}
BENCHMARK(BM_WganIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
