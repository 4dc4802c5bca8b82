#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gensep/audio.hpp"
#include "gensep/checkpoint.hpp"
#include "gensep/corpus.hpp"
#include "gensep/errors.hpp"
#include "gensep/rng.hpp"
#include "gensep/training.hpp"

using namespace gensep;

namespace {

double spectral_centroid(const Waveform& w, std::size_t n_fft, std::size_t hop) {
  auto [mag, phase] = magnitude_phase(stft(w, n_fft, hop));
  double num = 0.0, den = 0.0;
  const double bin_hz = w.sample_rate / static_cast<double>(n_fft);
  for (std::size_t f = 0; f < mag.bins(); ++f) {
    double row = 0.0;
    for (std::size_t t = 0; t < mag.frames(); ++t) row += mag.mag(f, t);
    num += row * static_cast<double>(f) * bin_hz;
    den += row;
  }
  return num / den;
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("synthesis is reproducible and bounded") {
  SynthProfile p = male_like_profile();
  Waveform a = synth_source(p, 1.0, 16000.0, 42);
  Waveform b = synth_source(p, 1.0, 16000.0, 42);
  Waveform c = synth_source(p, 1.0, 16000.0, 43);
  REQUIRE(a.samples.size() == 16000);
  bool identical = true, any_diff = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    identical = identical && a.samples[i] == b.samples[i];
    any_diff = any_diff || a.samples[i] != c.samples[i];
  }
  CHECK(identical);
  CHECK(any_diff);
  CHECK(peak(a) <= 1.0);
  CHECK(rms(a) > 0.0);
  CHECK(rms(a) <= 1.0);
  for (double s : a.samples) CHECK(std::isfinite(s));
}

TEST_CASE("profiles are spectrally distinguishable") {
  double centroid_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Waveform m = synth_source(male_like_profile(), 1.0, 16000.0, 100 + seed);
    Waveform f = synth_source(female_like_profile(), 1.0, 16000.0, 200 + seed);
    centroid_gap += spectral_centroid(f, 1024, 256) -
                    spectral_centroid(m, 1024, 256);
  }
  centroid_gap /= 10.0;
  CHECK(centroid_gap > 200.0);
}

TEST_CASE("synthesis rejects invalid profiles") {
  SynthProfile p = male_like_profile();
  p.f0_max = p.f0_min;
  CHECK_THROWS_AS(synth_source(p, 1.0, 16000.0, 1), ConfigError);
  p = male_like_profile();
  p.formant_bandwidths.pop_back();
  CHECK_THROWS_AS(synth_source(p, 1.0, 16000.0, 1), ConfigError);
  CHECK_THROWS_AS(synth_source(male_like_profile(), 0.0, 16000.0, 1),
                  ConfigError);
}

TEST_CASE("wav directory ingestion splits train and test") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gensep_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const double sr = 8000.0;
  std::vector<std::size_t> lengths;
  for (int i = 0; i < 10; ++i) {
    Waveform u = synth_source(male_like_profile(), 0.25, sr, 500 + i);
    lengths.push_back(u.samples.size());
    char name[32];
    std::snprintf(name, sizeof(name), "utt%02d.wav", i);
    write_wav((dir / name).string(), u);
  }

  SourceCorpus c = ingest_wav_dir(dir.string(), sr, 256, 64);
  // 9 training utterances concatenated, the 10th held out
  CHECK(c.test_waveform.samples.size() == lengths.back());

  // ingestion must equal concatenate-then-analyze
  Waveform concat;
  concat.sample_rate = sr;
  for (int i = 0; i < 9; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "utt%02d.wav", i);
    Waveform u = read_wav((dir / name).string());
    concat.samples.insert(concat.samples.end(), u.samples.begin(),
                          u.samples.end());
  }
  auto [expected_mag, phase] = magnitude_phase(stft(concat, 256, 64));
  REQUIRE(c.train_frames.frames() == expected_mag.frames());
  CHECK(c.train_frames.bins() == 129);
  CHECK(c.train_frames.mag.min() >= 0.0);
  for (std::size_t k = 0; k < expected_mag.mag.size(); ++k) {
    CHECK(c.train_frames.mag[k] == expected_mag.mag[k]);
  }

  // deterministic split given the same listing
  SourceCorpus c2 = ingest_wav_dir(dir.string(), sr, 256, 64);
  CHECK(c2.test_waveform.samples.size() == c.test_waveform.samples.size());

  // single file: no training data
  const fs::path lonely = fs::temp_directory_path() / "gensep_corpus_lonely";
  fs::remove_all(lonely);
  fs::create_directories(lonely);
  write_wav((lonely / "only.wav").string(),
            synth_source(male_like_profile(), 0.25, sr, 1));
  CHECK_THROWS_AS(ingest_wav_dir(lonely.string(), sr, 256, 64), InputError);

  // sample-rate mismatch
  CHECK_THROWS_AS(ingest_wav_dir(dir.string(), 16000.0, 256, 64), InputError);

  fs::remove_all(dir);
  fs::remove_all(lonely);
}

TEST_CASE("experiment sets are deterministic with distinct pair seeds") {
  CorpusConfig cfg;
  cfg.pairs = 5;
  cfg.seed = 77;
  ExperimentSet a = build_experiment_set(cfg);
  ExperimentSet b = build_experiment_set(cfg);
  REQUIRE(a.pairs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.pairs[i].seed_a == b.pairs[i].seed_a);
    CHECK(a.pairs[i].seed_b == b.pairs[i].seed_b);
    for (std::size_t j = i + 1; j < 5; ++j) {
      CHECK(a.pairs[i].seed_a != a.pairs[j].seed_a);
      CHECK(a.pairs[i].seed_b != a.pairs[j].seed_b);
    }
  }

  CorpusConfig defaults;
  CHECK(build_experiment_set(defaults).pairs.size() == 25);
}

TEST_CASE("materialized pairs mix at exactly 0 dB") {
  CorpusConfig cfg;
  cfg.pairs = 2;
  cfg.seed = 9;
  cfg.train_seconds = 0.6;
  cfg.test_seconds = 0.3;
  cfg.n_fft = 256;
  cfg.hop = 64;
  cfg.sample_rate = 8000.0;
  ExperimentSet set = build_experiment_set(cfg);
  MaterializedPair p = materialize_pair(set, 0);

  const double ra = rms(p.mix.a_scaled);
  const double rb = rms(p.mix.b_scaled);
  CHECK(std::abs(ra / rb - 1.0) < 1e-12);
  CHECK(p.mix_mag.bins() == 129);
  CHECK(p.a.train_frames.frames() > 10);

  MaterializedPair p2 = materialize_pair(set, 0);
  CHECK(pair_hash(p) == pair_hash(p2));
  MaterializedPair other = materialize_pair(set, 1);
  CHECK(pair_hash(p) != pair_hash(other));

  CHECK_THROWS_AS(materialize_pair(set, 7), ConfigError);
}

TEST_CASE("checkpoints round-trip bitwise through JSON") {
  CorpusConfig ccfg;
  ccfg.pairs = 1;
  ccfg.seed = 3;
  ccfg.train_seconds = 0.5;
  ccfg.test_seconds = 0.25;
  ccfg.n_fft = 128;
  ccfg.hop = 32;
  ccfg.sample_rate = 8000.0;
  ExperimentSet set = build_experiment_set(ccfg);
  MaterializedPair pair = materialize_pair(set, 0);

  for (ModelKind kind : {ModelKind::Wgan, ModelKind::Gan, ModelKind::MlAe,
                         ModelKind::Vae, ModelKind::Nmf}) {
    TrainConfig cfg;
    cfg.model_kind = kind;
    cfg.iterations = 8;
    cfg.batch_size = 8;
    cfg.hidden_units = 6;
    cfg.critic_hidden = 5;
    cfg.latent_dim = 10;
    cfg.vae_latent = 3;
    cfg.nmf_rank = 4;
    cfg.seed = 21;
    TrainedSourceModel m = train_source_model(pair.a.train_frames.mag, cfg);

    const std::string text = checkpoint_to_json(m);
    TrainedSourceModel back = checkpoint_from_json(text);
    CHECK(back.kind == m.kind);
    CHECK(back.seed == m.seed);
    CHECK(back.critic.has_value() == m.critic.has_value());
    REQUIRE(back.loss_curve.size() == m.loss_curve.size());
    for (std::size_t i = 0; i < m.loss_curve.size(); ++i) {
      CHECK(back.loss_curve[i].second == m.loss_curve[i].second);
    }
    if (kind == ModelKind::Nmf) {
      for (std::size_t k = 0; k < m.nmf().w.size(); ++k) {
        CHECK(back.nmf().w[k] == m.nmf().w[k]);
      }
    } else if (kind == ModelKind::Vae) {
      for (std::size_t k = 0; k < m.vae().dec_w3.size(); ++k) {
        CHECK(back.vae().dec_w3[k] == m.vae().dec_w3[k]);
      }
    } else {
      for (std::size_t k = 0; k < m.generator().w1.size(); ++k) {
        CHECK(back.generator().w1[k] == m.generator().w1[k]);
      }
      if (m.critic.has_value()) {
        for (std::size_t k = 0; k < m.critic->v1.size(); ++k) {
          CHECK(back.critic->v1[k] == m.critic->v1[k]);
        }
        CHECK(back.critic->output_kind == m.critic->output_kind);
      }
    }

    // file round trip
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / ("gensep_ckpt_" + to_string(kind) + ".json"))
            .string();
    save_checkpoint(path, m);
    TrainedSourceModel loaded = load_checkpoint(path);
    CHECK(checkpoint_to_json(loaded) == text);
    fs::remove(path);
  }

  CHECK_THROWS_AS(checkpoint_from_json("not json at all"), InputError);
  CHECK_THROWS_AS(checkpoint_from_json("{\"kind\":\"wgan\"}"), InputError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), InputError);
}

TEST_SUITE_END();
