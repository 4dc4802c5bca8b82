#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gensep/audio.hpp"
#include "gensep/errors.hpp"
#include "gensep/rng.hpp"
#include "gensep/spectrogram.hpp"

using namespace gensep;

namespace {

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += a[i] * a[i];
  }
  return std::sqrt(diff) / std::sqrt(ref);
}

Waveform random_waveform(std::size_t n, Rng& rng, double sr = 16000.0) {
  Waveform w;
  w.sample_rate = sr;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.uniform(-0.5, 0.5);
  return w;
}

}  // namespace

TEST_SUITE_BEGIN("signal");

TEST_CASE("stft of a bin-centered sine concentrates in one row") {
  const std::size_t n_fft = 1024, hop = 256;
  const double sr = 16000.0;
  const std::size_t bin = 64;  // 1000 Hz
  Waveform w;
  w.sample_rate = sr;
  w.samples.resize(16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = std::sin(2.0 * 3.14159265358979323846 * bin *
                            static_cast<double>(i) / 1024.0);
  }
  auto s = stft(w, n_fft, hop);
  auto [mag, phase] = magnitude_phase(s);
  std::size_t best_row = 0;
  double best = -1.0;
  std::vector<double> row_energy(mag.bins(), 0.0);
  for (std::size_t f = 0; f < mag.bins(); ++f) {
    for (std::size_t t = 0; t < mag.frames(); ++t) {
      row_energy[f] += mag.mag(f, t) * mag.mag(f, t);
    }
    if (row_energy[f] > best) {
      best = row_energy[f];
      best_row = f;
    }
  }
  CHECK(best_row == bin);
  for (std::size_t f = 0; f < mag.bins(); ++f) {
    if (f + 2 < bin || f > bin + 2) {
      CHECK(row_energy[f] < 0.01 * best);
    }
  }
}

TEST_CASE("stft of silence is all zero") {
  Waveform w;
  w.samples.assign(4096, 0.0);
  auto s = stft(w, 256, 64);
  CHECK(s.re.max() == 0.0);
  CHECK(s.re.min() == 0.0);
  CHECK(s.im.max() == 0.0);
}

TEST_CASE("stft rejects empty input and bad framing") {
  Waveform w;
  CHECK_THROWS_AS(stft(w, 256, 64), InputError);
  w.samples.assign(100, 0.1);
  CHECK_THROWS_AS(stft(w, 255, 64), ConfigError);
  CHECK_THROWS_AS(stft(w, 256, 0), ConfigError);
  CHECK_THROWS_AS(stft(w, 256, 512), ConfigError);
}

TEST_CASE("stft/istft roundtrip on random signals") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    Waveform w = random_waveform(1024 + 251 * (trial + 4), rng);
    auto s = stft(w, 256, 64);
    Waveform back = istft(s);
    REQUIRE(back.samples.size() == w.samples.size());
    CHECK(rel_l2(back.samples, w.samples) < 1e-6);
  }
}

TEST_CASE("roundtrip survives short inputs that need padding") {
  Rng rng(102);
  Waveform w = random_waveform(100, rng);  // shorter than n_fft
  auto s = stft(w, 256, 64);
  Waveform back = istft(s);
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(rel_l2(back.samples, w.samples) < 1e-6);
}

TEST_CASE("istft of a zero spectrogram is silence") {
  Rng rng(103);
  Waveform w = random_waveform(2048, rng);
  auto s = stft(w, 256, 64);
  s.re = Mat(s.re.rows(), s.re.cols());
  s.im = Mat(s.im.rows(), s.im.cols());
  Waveform back = istft(s);
  for (double v : back.samples) CHECK(v == 0.0);
}

TEST_CASE("istft single-frame degenerate case") {
  // hop = n_fft gives exactly one frame for an n_fft-long signal; samples
  // are recovered wherever the analysis window is nonzero (all but index 0).
  Rng rng(104);
  Waveform w = random_waveform(256, rng);
  auto s = stft(w, 256, 256);
  REQUIRE(s.frames() == 1);
  Waveform back = istft(s);
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(back.samples[0] == 0.0);
  for (std::size_t i = 1; i < back.samples.size(); ++i) {
    CHECK(back.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-9));
  }
}

TEST_CASE("istft rejects inconsistent bin count") {
  ComplexSpectrogram s;
  s.n_fft = 256;
  s.hop = 64;
  s.re = Mat(100, 4);
  s.im = Mat(100, 4);
  CHECK_THROWS_AS(istft(s), DimensionError);
}

TEST_CASE("stft is linear") {
  Rng rng(105);
  Waveform a = random_waveform(3000, rng);
  Waveform b = random_waveform(3000, rng);
  Waveform sum;
  sum.sample_rate = a.sample_rate;
  sum.samples.resize(3000);
  for (std::size_t i = 0; i < 3000; ++i) {
    sum.samples[i] = a.samples[i] + b.samples[i];
  }
  auto sa = stft(a, 256, 64), sb = stft(b, 256, 64), ss = stft(sum, 256, 64);
  double max_err = 0.0;
  for (std::size_t k = 0; k < ss.re.size(); ++k) {
    max_err = std::max(max_err, std::abs(ss.re[k] - sa.re[k] - sb.re[k]));
    max_err = std::max(max_err, std::abs(ss.im[k] - sa.im[k] - sb.im[k]));
  }
  CHECK(max_err < 1e-10);
}

TEST_CASE("magnitude and phase decomposition") {
  ComplexSpectrogram s;
  s.n_fft = 4;
  s.hop = 2;
  s.re = Mat(3, 1, {3.0, 0.0, -1.0});
  s.im = Mat(3, 1, {4.0, 0.0, 0.0});
  auto [mag, phase] = magnitude_phase(s);
  CHECK(mag.mag(0, 0) == doctest::Approx(5.0));
  CHECK(phase.re(0, 0) == doctest::Approx(0.6));
  CHECK(phase.im(0, 0) == doctest::Approx(0.8));
  // zero cell: unit real phase
  CHECK(mag.mag(1, 0) == 0.0);
  CHECK(phase.re(1, 0) == 1.0);
  CHECK(phase.im(1, 0) == 0.0);

  // mag (.) phase reconstructs the input exactly
  Rng rng(106);
  Waveform w = random_waveform(2000, rng);
  auto sp = stft(w, 256, 64);
  auto [m2, p2] = magnitude_phase(sp);
  double max_err = 0.0;
  for (std::size_t k = 0; k < sp.re.size(); ++k) {
    max_err = std::max(max_err, std::abs(m2.mag[k] * p2.re[k] - sp.re[k]));
    max_err = std::max(max_err, std::abs(m2.mag[k] * p2.im[k] - sp.im[k]));
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("0 dB mixing scales the second source to the first's RMS") {
  Waveform a, b;
  a.samples.assign(1000, 0.1);
  b.samples.assign(1000, 0.2);
  auto r = mix_at_0db(a, b);
  CHECK(r.b_scaled.samples[0] == doctest::Approx(0.1));  // scaled by 0.5
  const double ratio = rms(r.a_scaled) / rms(r.b_scaled);
  CHECK(std::abs(ratio - 1.0) < 1e-12);

  auto same = mix_at_0db(a, a);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(same.mixture.samples[i] == doctest::Approx(2.0 * a.samples[i]));
  }
}

TEST_CASE("0 dB mixing pads the shorter signal") {
  Rng rng(107);
  Waveform a = random_waveform(1000, rng);
  Waveform b = random_waveform(600, rng);
  auto r = mix_at_0db(a, b);
  CHECK(r.mixture.samples.size() == 1000);
  for (std::size_t i = 600; i < 1000; ++i) {
    CHECK(r.b_scaled.samples[i] == 0.0);
    CHECK(r.mixture.samples[i] == r.a_scaled.samples[i]);
  }
}

TEST_CASE("0 dB mixing rejects silence and rate mismatch") {
  Waveform a, b;
  a.samples.assign(100, 0.1);
  b.samples.assign(100, 0.0);
  CHECK_THROWS_AS(mix_at_0db(a, b), InputError);
  b.samples.assign(100, 0.1);
  b.sample_rate = 8000.0;
  CHECK_THROWS_AS(mix_at_0db(a, b), InputError);
}

TEST_CASE("wiener masks split the mixture and partition to one") {
  Rng rng(108);
  Waveform mix_w = random_waveform(3000, rng);
  auto s = stft(mix_w, 256, 64);
  auto [mag, phase] = magnitude_phase(s);

  SUBCASE("equal estimates halve the mixture") {
    Mat est(mag.bins(), mag.frames(), 1.0);
    auto [w1, w2] = wiener_reconstruct(est, est, mag, phase);
    Waveform full = istft(s);
    for (std::size_t i = 0; i < full.samples.size(); ++i) {
      CHECK(w1.samples[i] == doctest::Approx(0.5 * full.samples[i]).epsilon(1e-9));
      CHECK(w2.samples[i] == doctest::Approx(0.5 * full.samples[i]).epsilon(1e-9));
    }
  }

  SUBCASE("zero second estimate routes everything to source one") {
    Mat est1(mag.bins(), mag.frames(), 1.0);
    Mat est2(mag.bins(), mag.frames(), 0.0);
    auto [w1, w2] = wiener_reconstruct(est1, est2, mag, phase);
    CHECK(rel_l2(w1.samples, mix_w.samples) < 1e-6);
    for (double v : w2.samples) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("reconstructed sources always sum back to the mixture") {
    Mat est1 = Mat::rand_uniform(mag.bins(), mag.frames(), 0.0, 2.0, rng);
    Mat est2 = Mat::rand_uniform(mag.bins(), mag.frames(), 0.0, 2.0, rng);
    auto [w1, w2] = wiener_reconstruct(est1, est2, mag, phase);
    std::vector<double> sum(w1.samples.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] = w1.samples[i] + w2.samples[i];
    }
    CHECK(rel_l2(sum, mix_w.samples) < 1e-9);
  }
}

TEST_CASE("wiener rejects bad inputs") {
  Rng rng(109);
  Waveform mix_w = random_waveform(1000, rng);
  auto s = stft(mix_w, 256, 64);
  auto [mag, phase] = magnitude_phase(s);
  Mat wrong(3, 3);
  CHECK_THROWS_AS(wiener_reconstruct(wrong, wrong, mag, phase), DimensionError);
  Mat neg(mag.bins(), mag.frames(), -0.5);
  Mat ok(mag.bins(), mag.frames(), 0.5);
  CHECK_THROWS_AS(wiener_reconstruct(neg, ok, mag, phase), InputError);
}

TEST_CASE("wav roundtrip within quantization error") {
  Rng rng(110);
  Waveform w = random_waveform(5000, rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "gensep_test_rt.wav").string();
  write_wav(path, w);
  Waveform back = read_wav(path);
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(back.sample_rate == w.sample_rate);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects missing and malformed files") {
  CHECK_THROWS_AS(read_wav("/nonexistent/gensep.wav"), InputError);
  const std::string path =
      (std::filesystem::temp_directory_path() / "gensep_test_bad.wav").string();
  {
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("definitely not a wav file at all.............", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_wav(path), InputError);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
