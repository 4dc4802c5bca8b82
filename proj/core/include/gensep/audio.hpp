#pragma once

#include <string>
#include <tuple>
#include <vector>

namespace gensep {

// Mono time-domain signal.
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  std::size_t size() const { return samples.size(); }
};

double rms(const Waveform& w);
double peak(const Waveform& w);

// PCM 16-bit mono WAV. Anything else is rejected; resampling is out of scope.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

struct MixResult {
  Waveform mixture;
  Waveform a_scaled;
  Waveform b_scaled;
};

// Rescales b to the RMS of a (0 dB mix), zero-pads the shorter signal to the
// longer, and sums. Rejects silent inputs and sample-rate mismatches.
MixResult mix_at_0db(const Waveform& a, const Waveform& b);

}  // namespace gensep
