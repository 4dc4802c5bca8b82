#include "gensep/spectrogram.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "gensep/errors.hpp"

namespace gensep {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaskFloor = 1e-12;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative in-place radix-2 FFT. inverse=true applies conjugate twiddles
// and the 1/n scale.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                 static_cast<double>(n)));
  }
  return w;
}

}  // namespace

ComplexSpectrogram stft(const Waveform& w, std::size_t n_fft, std::size_t hop) {
  if (w.samples.empty()) throw InputError("stft: empty waveform");
  if (!is_pow2(n_fft)) throw ConfigError("stft: n_fft must be a power of two");
  if (hop == 0 || hop > n_fft) throw ConfigError("stft: need 0 < hop <= n_fft");

  // Pad both ends so every original sample sees the full window overlap;
  // istft undoes the padding.
  const std::size_t pad_left = n_fft - hop;
  std::size_t padded = pad_left + w.samples.size() + (n_fft - hop);
  if (padded < n_fft) padded = n_fft;
  if ((padded - n_fft) % hop != 0) {
    padded += hop - (padded - n_fft) % hop;
  }

  std::vector<double> x(padded, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), x.begin() + pad_left);

  const std::size_t frames = (padded - n_fft) / hop + 1;
  const std::size_t bins = n_fft / 2 + 1;
  const std::vector<double> window = periodic_hann(n_fft);

  ComplexSpectrogram s;
  s.re = Mat(bins, frames);
  s.im = Mat(bins, frames);
  s.n_fft = n_fft;
  s.hop = hop;
  s.pad_left = pad_left;
  s.orig_len = w.samples.size();
  s.sample_rate = w.sample_rate;

  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* frame = x.data() + t * hop;
    for (std::size_t i = 0; i < n_fft; ++i) buf[i] = frame[i] * window[i];
    fft_inplace(buf, false);
    for (std::size_t f = 0; f < bins; ++f) {
      s.re(f, t) = buf[f].real();
      s.im(f, t) = buf[f].imag();
    }
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s) {
  if (!is_pow2(s.n_fft)) throw ConfigError("istft: n_fft must be a power of two");
  const std::size_t bins = s.n_fft / 2 + 1;
  if (s.re.rows() != bins || !s.re.same_shape(s.im)) {
    throw DimensionError("istft: bin count does not match n_fft");
  }

  const std::size_t frames = s.frames();
  const std::size_t padded = (frames - 1) * s.hop + s.n_fft;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> win_acc(padded, 0.0);
  const std::vector<double> window = periodic_hann(s.n_fft);

  std::vector<std::complex<double>> buf(s.n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      buf[f] = {s.re(f, t), s.im(f, t)};
    }
    for (std::size_t f = bins; f < s.n_fft; ++f) {
      buf[f] = std::conj(buf[s.n_fft - f]);
    }
    fft_inplace(buf, true);
    double* out = acc.data() + t * s.hop;
    double* wsum = win_acc.data() + t * s.hop;
    for (std::size_t i = 0; i < s.n_fft; ++i) {
      out[i] += buf[i].real();
      wsum[i] += window[i];
    }
  }

  for (std::size_t i = 0; i < padded; ++i) {
    acc[i] = win_acc[i] > 1e-8 ? acc[i] / win_acc[i] : 0.0;
  }

  Waveform w;
  w.sample_rate = s.sample_rate;
  if (s.orig_len > 0) {
    const std::size_t lo = std::min(s.pad_left, padded);
    const std::size_t hi = std::min(lo + s.orig_len, padded);
    w.samples.assign(acc.begin() + lo, acc.begin() + hi);
    w.samples.resize(s.orig_len, 0.0);
  } else {
    w.samples = std::move(acc);
  }
  return w;
}

std::pair<MagnitudeSpectrogram, PhaseSpectrogram> magnitude_phase(
    const ComplexSpectrogram& s) {
  MagnitudeSpectrogram mag;
  mag.mag = Mat(s.re.rows(), s.re.cols());
  mag.n_fft = s.n_fft;
  mag.hop = s.hop;
  mag.pad_left = s.pad_left;
  mag.orig_len = s.orig_len;
  mag.sample_rate = s.sample_rate;

  PhaseSpectrogram phase;
  phase.re = Mat(s.re.rows(), s.re.cols());
  phase.im = Mat(s.re.rows(), s.re.cols());

  for (std::size_t k = 0; k < s.re.size(); ++k) {
    const double m = std::hypot(s.re[k], s.im[k]);
    mag.mag[k] = m;
    if (m > 0.0) {
      phase.re[k] = s.re[k] / m;
      phase.im[k] = s.im[k] / m;
    } else {
      phase.re[k] = 1.0;  // convention: unit real phase at zero magnitude
      phase.im[k] = 0.0;
    }
  }
  return {std::move(mag), std::move(phase)};
}

std::pair<Waveform, Waveform> wiener_reconstruct(
    const Mat& s1_hat, const Mat& s2_hat, const MagnitudeSpectrogram& mix_mag,
    const PhaseSpectrogram& mix_phase) {
  if (!s1_hat.same_shape(s2_hat) || !s1_hat.same_shape(mix_mag.mag) ||
      !s1_hat.same_shape(mix_phase.re)) {
    throw DimensionError("wiener_reconstruct: shape mismatch");
  }
  if (s1_hat.min() < 0.0 || s2_hat.min() < 0.0) {
    throw InputError("wiener_reconstruct: negative magnitude estimate");
  }

  ComplexSpectrogram rec1, rec2;
  rec1.re = Mat(s1_hat.rows(), s1_hat.cols());
  rec1.im = Mat(s1_hat.rows(), s1_hat.cols());
  rec2 = rec1;
  for (ComplexSpectrogram* r : {&rec1, &rec2}) {
    r->n_fft = mix_mag.n_fft;
    r->hop = mix_mag.hop;
    r->pad_left = mix_mag.pad_left;
    r->orig_len = mix_mag.orig_len;
    r->sample_rate = mix_mag.sample_rate;
  }

  for (std::size_t k = 0; k < s1_hat.size(); ++k) {
    const double denom = s1_hat[k] + s2_hat[k];
    // complementary masks: m2 = 1 - m1 keeps the partition exact
    const double m1 = denom > kMaskFloor ? s1_hat[k] / denom : 0.5;
    const double m2 = 1.0 - m1;
    const double xre = mix_mag.mag[k] * mix_phase.re[k];
    const double xim = mix_mag.mag[k] * mix_phase.im[k];
    rec1.re[k] = m1 * xre;
    rec1.im[k] = m1 * xim;
    rec2.re[k] = m2 * xre;
    rec2.im[k] = m2 * xim;
  }
  return {istft(rec1), istft(rec2)};
}

}  // namespace gensep
