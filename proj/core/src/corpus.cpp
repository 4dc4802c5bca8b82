#include "gensep/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "gensep/errors.hpp"
#include "gensep/rng.hpp"

namespace gensep {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// slow multi-sine drift in [-1, 1]
struct Drift {
  double freq[3];
  double phase[3];

  Drift(Rng& rng, double lo_hz, double hi_hz) {
    for (int i = 0; i < 3; ++i) {
      freq[i] = rng.uniform(lo_hz, hi_hz);
      phase[i] = rng.uniform(0.0, kTwoPi);
    }
  }

  double at(double t) const {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += std::sin(kTwoPi * freq[i] * t + phase[i]);
    return v / 3.0;
  }
};

// band-pass resonator for the noise-excited segments
struct Biquad {
  double b0 = 0, b2 = 0, a1 = 0, a2 = 0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  void set(double center_hz, double bandwidth_hz, double sample_rate) {
    const double w0 = kTwoPi * center_hz / sample_rate;
    const double q = std::max(center_hz / bandwidth_hz, 0.5);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

SynthProfile male_like_profile() {
  SynthProfile p;
  p.name = "male_like";
  p.f0_min = 85.0;
  p.f0_max = 155.0;
  p.formants = {500.0, 1500.0, 2500.0};
  p.formant_bandwidths = {120.0, 180.0, 250.0};
  p.vibrato_hz = 4.5;
  p.vibrato_depth = 0.015;
  p.syllable_hz = 3.0;
  p.unvoiced_ratio = 0.25;
  p.formant_wobble = 0.18;
  return p;
}

SynthProfile female_like_profile() {
  SynthProfile p;
  p.name = "female_like";
  p.f0_min = 165.0;
  p.f0_max = 255.0;
  p.formants = {860.0, 2100.0, 3300.0};
  p.formant_bandwidths = {150.0, 220.0, 300.0};
  p.vibrato_hz = 5.5;
  p.vibrato_depth = 0.02;
  p.syllable_hz = 3.6;
  p.unvoiced_ratio = 0.25;
  p.formant_wobble = 0.18;
  return p;
}

Waveform synth_source(const SynthProfile& profile, double duration_s,
                      double sample_rate, std::uint64_t seed) {
  if (profile.f0_min <= 0.0 || profile.f0_max <= profile.f0_min) {
    throw ConfigError("synth_source: need 0 < f0_min < f0_max");
  }
  if (profile.formants.empty() ||
      profile.formants.size() != profile.formant_bandwidths.size()) {
    throw ConfigError("synth_source: formants/bandwidths mismatch");
  }
  if (duration_s <= 0.0 || sample_rate <= 0.0) {
    throw ConfigError("synth_source: duration and sample rate must be positive");
  }

  const std::size_t n = static_cast<std::size_t>(duration_s * sample_rate);
  const double nyquist_guard = 0.45 * sample_rate;
  const std::size_t harmonics = std::max<std::size_t>(
      1, static_cast<std::size_t>(nyquist_guard / profile.f0_max));

  Rng rng(seed);
  Drift pitch_drift(rng, 0.2, 0.9);
  Drift formant_drift(rng, 0.3, 1.1);
  const double syllable_phase = rng.uniform(0.0, kTwoPi);
  const double pause_phase = rng.uniform(0.0, kTwoPi);
  const double pause_hz = rng.uniform(0.25, 0.6);
  const double voicing_hz = rng.uniform(1.2, 2.8);
  const double voicing_phase = rng.uniform(0.0, kTwoPi);
  // sin(x) > cos(pi*r) on a fraction r of a uniform-phase cycle
  const double voicing_gate =
      std::cos(3.14159265358979323846 *
               std::clamp(profile.unvoiced_ratio, 0.0, 0.95));

  std::vector<double> theta(harmonics);
  for (auto& t : theta) t = rng.uniform(0.0, kTwoPi);

  const double f0_center = 0.5 * (profile.f0_min + profile.f0_max);
  const double f0_span = 0.5 * (profile.f0_max - profile.f0_min);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);

  // harmonic gains and resonators refreshed block-wise; they drift slowly
  const std::size_t block = 64;
  std::vector<double> gains(harmonics, 0.0);
  std::vector<Biquad> resonators(profile.formants.size());

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f0 =
        f0_center + f0_span * pitch_drift.at(t) +
        profile.vibrato_depth * f0_center *
            std::sin(kTwoPi * profile.vibrato_hz * t);

    if (i % block == 0) {
      const double wobble =
          1.0 + profile.formant_wobble * formant_drift.at(t);
      for (std::size_t k = 0; k < harmonics; ++k) {
        const double f = (static_cast<double>(k) + 1.0) * f0;
        if (f >= nyquist_guard) {
          gains[k] = 0.0;
          continue;
        }
        double g = 0.05;
        for (std::size_t m = 0; m < profile.formants.size(); ++m) {
          const double center = profile.formants[m] * wobble;
          const double bw = profile.formant_bandwidths[m];
          const double d = (f - center) / bw;
          g += std::exp(-0.5 * d * d);
        }
        gains[k] = g / std::sqrt(static_cast<double>(k) + 1.0);
      }
      for (std::size_t m = 0; m < resonators.size(); ++m) {
        const double center =
            std::min(profile.formants[m] * wobble, nyquist_guard);
        resonators[m].set(center, profile.formant_bandwidths[m], sample_rate);
      }
    }

    // syllabic energy envelope; never fully silent so RMS stays positive
    const double syllable =
        0.5 + 0.5 * std::sin(kTwoPi * profile.syllable_hz * t + syllable_phase);
    const double pause =
        0.65 + 0.35 * std::sin(kTwoPi * pause_hz * t + pause_phase);
    const double env = 0.08 + 0.92 * std::pow(syllable * pause, 1.5);

    // crossfade between harmonic and noise excitation
    const double voicing_osc = std::sin(kTwoPi * voicing_hz * t + voicing_phase);
    const double noise_frac =
        std::clamp((voicing_osc - voicing_gate) / 0.08, 0.0, 1.0);

    double harm = 0.0;
    for (std::size_t k = 0; k < harmonics; ++k) {
      theta[k] += kTwoPi * (static_cast<double>(k) + 1.0) * f0 / sample_rate;
      if (theta[k] > kTwoPi) theta[k] -= kTwoPi * std::floor(theta[k] / kTwoPi);
      if (gains[k] == 0.0) continue;
      harm += gains[k] * std::sin(theta[k]);
    }

    const double excitation = rng.normal();
    double fric = 0.0;
    for (std::size_t m = 0; m < resonators.size(); ++m) {
      // later resonators weighted up for a fricative-like tilt
      fric += (0.6 + 0.3 * static_cast<double>(m)) *
              resonators[m].step(excitation);
    }

    double acc = (1.0 - noise_frac) * harm + noise_frac * 2.2 * fric;
    acc += 0.01 * rng.normal();  // breathiness
    w.samples[i] = env * acc;
  }

  const double p = peak(w);
  if (p > 0.0) {
    const double scale = 0.9 / p;
    for (auto& s : w.samples) s *= scale;
  }
  return w;
}

SourceCorpus make_synthetic_corpus(const SynthProfile& profile,
                                   const std::string& label,
                                   double train_seconds, double test_seconds,
                                   double sample_rate, std::size_t n_fft,
                                   std::size_t hop, std::uint64_t seed) {
  SourceCorpus c;
  c.label = label;
  c.seed = seed;
  Waveform train = synth_source(profile, train_seconds, sample_rate,
                                derive_seed(seed, 0xA11D10));
  c.test_waveform = synth_source(profile, test_seconds, sample_rate,
                                 derive_seed(seed, 0x7E57));
  c.train_frames = magnitude_phase(stft(train, n_fft, hop)).first;
  return c;
}

SourceCorpus ingest_wav_dir(const std::string& path, double expected_rate,
                            std::size_t n_fft, std::size_t hop) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) {
    throw InputError("ingest_wav_dir: not a directory: " + path);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() >= 4) {
      std::string ext = name.substr(name.size() - 4);
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char ch) { return std::tolower(ch); });
      if (ext == ".wav") files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) {
    throw InputError("ingest_wav_dir: need at least two WAV files (train + "
                     "test), found " + std::to_string(files.size()));
  }

  Waveform train;
  train.sample_rate = expected_rate;
  for (std::size_t i = 0; i + 1 < files.size(); ++i) {
    Waveform u = read_wav(files[i]);
    if (u.sample_rate != expected_rate) {
      throw InputError("ingest_wav_dir: sample rate mismatch in " + files[i]);
    }
    train.samples.insert(train.samples.end(), u.samples.begin(),
                         u.samples.end());
  }
  Waveform test = read_wav(files.back());
  if (test.sample_rate != expected_rate) {
    throw InputError("ingest_wav_dir: sample rate mismatch in " + files.back());
  }

  SourceCorpus c;
  c.label = fs::path(path).filename().string();
  c.seed = 0;
  c.test_waveform = std::move(test);
  c.train_frames = magnitude_phase(stft(train, n_fft, hop)).first;
  return c;
}

void CorpusConfig::validate() const {
  if (pairs == 0) throw ConfigError("corpus: pairs must be positive");
  if (train_seconds <= 0.0 || test_seconds <= 0.0) {
    throw ConfigError("corpus: durations must be positive");
  }
  if (sample_rate <= 0.0) throw ConfigError("corpus: sample_rate must be positive");
  if (n_fft == 0 || (n_fft & (n_fft - 1)) != 0) {
    throw ConfigError("corpus: n_fft must be a power of two");
  }
  if (hop == 0 || hop > n_fft) throw ConfigError("corpus: need 0 < hop <= n_fft");
}

ExperimentSet build_experiment_set(const CorpusConfig& config) {
  config.validate();
  ExperimentSet set;
  set.config = config;
  set.pairs.reserve(config.pairs);
  for (std::size_t i = 0; i < config.pairs; ++i) {
    PairSpec spec;
    spec.id = i;
    spec.profile_a = male_like_profile();
    spec.profile_b = female_like_profile();
    spec.seed_a = derive_seed(config.seed, i, 1);
    spec.seed_b = derive_seed(config.seed, i, 2);
    set.pairs.push_back(std::move(spec));
  }
  return set;
}

MaterializedPair materialize_pair(const ExperimentSet& set, std::size_t index) {
  if (index >= set.pairs.size()) {
    throw ConfigError("materialize_pair: pair index out of range");
  }
  const PairSpec& spec = set.pairs[index];
  const CorpusConfig& c = set.config;

  MaterializedPair p;
  p.a = make_synthetic_corpus(spec.profile_a, spec.profile_a.name,
                              c.train_seconds, c.test_seconds, c.sample_rate,
                              c.n_fft, c.hop, spec.seed_a);
  p.b = make_synthetic_corpus(spec.profile_b, spec.profile_b.name,
                              c.train_seconds, c.test_seconds, c.sample_rate,
                              c.n_fft, c.hop, spec.seed_b);
  p.mix = mix_at_0db(p.a.test_waveform, p.b.test_waveform);
  auto spec_mix = stft(p.mix.mixture, c.n_fft, c.hop);
  auto [mag, phase] = magnitude_phase(spec_mix);
  p.mix_mag = std::move(mag);
  p.mix_phase = std::move(phase);
  return p;
}

std::uint64_t pair_hash(const MaterializedPair& pair) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto absorb = [&h](const std::vector<double>& v) {
    for (double d : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof(bits));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
      }
    }
  };
  absorb(pair.a.test_waveform.samples);
  absorb(pair.b.test_waveform.samples);
  absorb(pair.mix.mixture.samples);
  return h;
}

}  // namespace gensep
