#pragma once

#include <utility>

#include "gensep/audio.hpp"
#include "gensep/mat.hpp"

namespace gensep {

// One-sided complex STFT, F = n_fft/2 + 1 bins.
// pad_left/orig_len record the analysis padding so istft can hand back
// exactly the samples of the analyzed signal.
struct ComplexSpectrogram {
  Mat re, im;  // F x T
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  std::size_t pad_left = 0;
  std::size_t orig_len = 0;  // 0 = unknown
  double sample_rate = 16000.0;

  std::size_t bins() const { return re.rows(); }
  std::size_t frames() const { return re.cols(); }
};

// Non-negative magnitudes with the layout metadata of the STFT they came from.
struct MagnitudeSpectrogram {
  Mat mag;  // F x T, >= 0
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  std::size_t pad_left = 0;
  std::size_t orig_len = 0;
  double sample_rate = 16000.0;

  std::size_t bins() const { return mag.rows(); }
  std::size_t frames() const { return mag.cols(); }
};

// Unit-modulus phase factors per cell.
struct PhaseSpectrogram {
  Mat re, im;  // F x T
};

// Periodic Hann analysis. The signal is padded so every sample of the
// original is covered by a full complement of overlapping windows, which
// makes the istft below an exact inverse.
ComplexSpectrogram stft(const Waveform& w, std::size_t n_fft, std::size_t hop);

// Overlap-add synthesis normalized by the accumulated window at each sample;
// output trimmed back to the originally analyzed samples when known.
Waveform istft(const ComplexSpectrogram& s);

// mag = |S| and phase = S / |S|, with phase fixed to 1 + 0i where mag = 0 so
// that mag (.) phase always reconstructs S exactly.
std::pair<MagnitudeSpectrogram, PhaseSpectrogram> magnitude_phase(
    const ComplexSpectrogram& s);

// Soft-masks the mixture by each source's share of the estimated total
// magnitude, then inverts. Mask denominator floored at 1e-12; cells where
// both estimates vanish are split half/half.
std::pair<Waveform, Waveform> wiener_reconstruct(
    const Mat& s1_hat, const Mat& s2_hat, const MagnitudeSpectrogram& mix_mag,
    const PhaseSpectrogram& mix_phase);

}  // namespace gensep
