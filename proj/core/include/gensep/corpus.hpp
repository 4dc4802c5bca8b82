#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gensep/audio.hpp"
#include "gensep/spectrogram.hpp"

namespace gensep {

// Harmonic-source recipe: pitch range, formant resonances, vibrato, and the
// voiced/unvoiced structure of the excitation.
struct SynthProfile {
  std::string name;
  double f0_min = 85.0;
  double f0_max = 155.0;
  std::vector<double> formants = {500.0, 1500.0, 2500.0};
  std::vector<double> formant_bandwidths = {120.0, 180.0, 250.0};
  double vibrato_hz = 5.0;
  double vibrato_depth = 0.02;  // fraction of f0
  double syllable_hz = 3.0;
  // fraction of time spent in noise-excited (fricative-like) segments
  double unvoiced_ratio = 0.0;
  // relative formant drift over time (vowel movement)
  double formant_wobble = 0.06;
};

// Rough male/female pitch and formant placements; distinct enough to be
// separable in principle while still overlapping in band.
SynthProfile male_like_profile();
SynthProfile female_like_profile();

// Harmonic source with a drifting pitch contour, formant-shaped harmonic
// amplitudes, a syllabic energy envelope and a faint noise floor.
// Deterministic per seed; peak-normalized below 1.
Waveform synth_source(const SynthProfile& profile, double duration_s,
                      double sample_rate, std::uint64_t seed);

struct SourceCorpus {
  MagnitudeSpectrogram train_frames;
  Waveform test_waveform;
  std::string label;
  std::uint64_t seed = 0;
};

// Synthesizes a training stream and test utterance from one profile.
SourceCorpus make_synthetic_corpus(const SynthProfile& profile,
                                   const std::string& label,
                                   double train_seconds, double test_seconds,
                                   double sample_rate, std::size_t n_fft,
                                   std::size_t hop, std::uint64_t seed);

// A directory of mono PCM16 WAV utterances: the lexicographically last file
// becomes the test utterance, the rest are concatenated for training.
SourceCorpus ingest_wav_dir(const std::string& path, double expected_rate,
                            std::size_t n_fft, std::size_t hop);

struct CorpusConfig {
  std::size_t pairs = 25;
  double train_seconds = 30.0;
  double test_seconds = 3.0;
  double sample_rate = 16000.0;
  std::size_t n_fft = 1024;
  std::size_t hop = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PairSpec {
  std::size_t id = 0;
  SynthProfile profile_a, profile_b;
  std::uint64_t seed_a = 0, seed_b = 0;
};

// The experiment plan: pair seeds and profiles only. Audio is materialized
// per pair so a full set never needs to sit in memory at once.
struct ExperimentSet {
  CorpusConfig config;
  std::vector<PairSpec> pairs;
};

ExperimentSet build_experiment_set(const CorpusConfig& config);

struct MaterializedPair {
  SourceCorpus a, b;
  MixResult mix;  // 0 dB mixture of the two test utterances
  MagnitudeSpectrogram mix_mag;
  PhaseSpectrogram mix_phase;
};

MaterializedPair materialize_pair(const ExperimentSet& set, std::size_t index);

// Order-independent content hash over a pair's audio; the XOR of all pair
// hashes identifies the corpus an experiment consumed.
std::uint64_t pair_hash(const MaterializedPair& pair);

}  // namespace gensep
