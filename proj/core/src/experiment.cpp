#include "gensep/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "gensep/checkpoint.hpp"
#include "gensep/errors.hpp"
#include "gensep/evaluation.hpp"

namespace gensep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// shortest representation that parses back to the same double
std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc | std::ios::binary);
    if (!f) throw InputError("cannot write " + tmp.string());
    f << content;
    if (!f) throw InputError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

std::string curve_csv(const std::vector<std::pair<std::size_t, double>>& curve,
                      const char* value_name) {
  std::string out = std::string("iteration,") + value_name + "\n";
  for (const auto& [it, v] : curve) {
    out += std::to_string(it) + "," + fmt_double(v) + "\n";
  }
  return out;
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

RunConfig RunConfig::normalized() const {
  RunConfig c = *this;
  if (c.jobs == 0) throw ConfigError("config: jobs must be positive");
  if (c.out_dir.empty()) throw ConfigError("config: out_dir must be set");
  if (c.models.empty()) throw ConfigError("config: no models enabled");
  c.corpus.seed = derive_seed(c.seed, 0xC0);
  if (c.train.latent_dim == 0) c.train.latent_dim = c.corpus.n_fft / 2 + 1;
  c.corpus.validate();
  c.train.validate();
  c.separation.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& cfg) {
  json models = json::array();
  for (ModelKind k : cfg.models) models.push_back(to_string(k));
  json j{
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"out_dir", cfg.out_dir},
      {"models", models},
      {"corpus",
       {{"pairs", cfg.corpus.pairs},
        {"train_seconds", cfg.corpus.train_seconds},
        {"test_seconds", cfg.corpus.test_seconds},
        {"sample_rate", cfg.corpus.sample_rate},
        {"n_fft", cfg.corpus.n_fft},
        {"hop", cfg.corpus.hop}}},
      {"train",
       {{"iterations", cfg.train.iterations},
        {"learning_rate", cfg.train.learning_rate},
        {"critic_steps_per_gen", cfg.train.critic_steps_per_gen},
        {"clip_lo", cfg.train.clip_lo},
        {"clip_hi", cfg.train.clip_hi},
        {"batch_size", cfg.train.batch_size},
        {"hidden_units", cfg.train.hidden_units},
        {"critic_hidden", cfg.train.critic_hidden},
        {"latent_dim", cfg.train.latent_dim},
        {"vae_latent", cfg.train.vae_latent},
        {"nmf_rank", cfg.train.nmf_rank},
        {"rmsprop_decay", cfg.train.rmsprop_decay},
        {"rmsprop_epsilon", cfg.train.rmsprop_epsilon},
        {"init_weight_std", cfg.train.init_weight_std},
        {"gan_nonsaturating", cfg.train.gan_nonsaturating},
        {"telemetry_every", cfg.train.telemetry_every}}},
      {"separation",
       {{"alpha", cfg.separation.alpha},
        {"beta", cfg.separation.beta},
        {"iterations", cfg.separation.iterations},
        {"learning_rate", cfg.separation.learning_rate},
        {"trace_every", cfg.separation.trace_every}}}};
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<std::size_t>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("models")) {
      cfg.models.clear();
      for (const auto& name : j["models"]) {
        cfg.models.push_back(parse_model_kind(name.get<std::string>()));
      }
    }
    if (j.contains("corpus")) {
      const json& c = j["corpus"];
      if (c.contains("pairs")) cfg.corpus.pairs = c["pairs"].get<std::size_t>();
      if (c.contains("train_seconds"))
        cfg.corpus.train_seconds = c["train_seconds"].get<double>();
      if (c.contains("test_seconds"))
        cfg.corpus.test_seconds = c["test_seconds"].get<double>();
      if (c.contains("sample_rate"))
        cfg.corpus.sample_rate = c["sample_rate"].get<double>();
      if (c.contains("n_fft")) cfg.corpus.n_fft = c["n_fft"].get<std::size_t>();
      if (c.contains("hop")) cfg.corpus.hop = c["hop"].get<std::size_t>();
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      if (t.contains("iterations"))
        cfg.train.iterations = t["iterations"].get<std::size_t>();
      if (t.contains("learning_rate"))
        cfg.train.learning_rate = t["learning_rate"].get<double>();
      if (t.contains("critic_steps_per_gen"))
        cfg.train.critic_steps_per_gen =
            t["critic_steps_per_gen"].get<std::size_t>();
      if (t.contains("clip_lo")) cfg.train.clip_lo = t["clip_lo"].get<double>();
      if (t.contains("clip_hi")) cfg.train.clip_hi = t["clip_hi"].get<double>();
      if (t.contains("batch_size"))
        cfg.train.batch_size = t["batch_size"].get<std::size_t>();
      if (t.contains("hidden_units"))
        cfg.train.hidden_units = t["hidden_units"].get<std::size_t>();
      if (t.contains("critic_hidden"))
        cfg.train.critic_hidden = t["critic_hidden"].get<std::size_t>();
      if (t.contains("latent_dim"))
        cfg.train.latent_dim = t["latent_dim"].get<std::size_t>();
      if (t.contains("vae_latent"))
        cfg.train.vae_latent = t["vae_latent"].get<std::size_t>();
      if (t.contains("nmf_rank"))
        cfg.train.nmf_rank = t["nmf_rank"].get<std::size_t>();
      if (t.contains("rmsprop_decay"))
        cfg.train.rmsprop_decay = t["rmsprop_decay"].get<double>();
      if (t.contains("rmsprop_epsilon"))
        cfg.train.rmsprop_epsilon = t["rmsprop_epsilon"].get<double>();
      if (t.contains("init_weight_std"))
        cfg.train.init_weight_std = t["init_weight_std"].get<double>();
      if (t.contains("gan_nonsaturating"))
        cfg.train.gan_nonsaturating = t["gan_nonsaturating"].get<bool>();
      if (t.contains("telemetry_every"))
        cfg.train.telemetry_every = t["telemetry_every"].get<std::size_t>();
    }
    if (j.contains("separation")) {
      const json& s = j["separation"];
      if (s.contains("alpha")) cfg.separation.alpha = s["alpha"].get<double>();
      if (s.contains("beta")) cfg.separation.beta = s["beta"].get<double>();
      if (s.contains("iterations"))
        cfg.separation.iterations = s["iterations"].get<std::size_t>();
      if (s.contains("learning_rate"))
        cfg.separation.learning_rate = s["learning_rate"].get<double>();
      if (s.contains("trace_every"))
        cfg.separation.trace_every = s["trace_every"].get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: mistyped field: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_file(path));
}

void cmd_synth(const RunConfig& raw) {
  const RunConfig cfg = raw.normalized();
  const fs::path root = fs::path(cfg.out_dir) / "corpus";
  fs::create_directories(root);

  ExperimentSet set = build_experiment_set(cfg.corpus);
  json manifest;
  manifest["seed"] = cfg.seed;
  manifest["pairs"] = json::array();

  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    MaterializedPair pair = materialize_pair(set, i);
    char name[32];
    std::snprintf(name, sizeof(name), "pair%03zu", i);
    const fs::path dir = root / name;
    fs::create_directories(dir);

    // training material is re-synthesized from the pair seed for WAV export
    Waveform train_a =
        synth_source(set.pairs[i].profile_a, cfg.corpus.train_seconds,
                     cfg.corpus.sample_rate, derive_seed(set.pairs[i].seed_a, 0xA11D10));
    Waveform train_b =
        synth_source(set.pairs[i].profile_b, cfg.corpus.train_seconds,
                     cfg.corpus.sample_rate, derive_seed(set.pairs[i].seed_b, 0xA11D10));
    write_wav((dir / "a_train.wav").string(), train_a);
    write_wav((dir / "b_train.wav").string(), train_b);
    write_wav((dir / "a_test.wav").string(), pair.a.test_waveform);
    write_wav((dir / "b_test.wav").string(), pair.b.test_waveform);
    write_wav((dir / "mixture.wav").string(), pair.mix.mixture);

    manifest["pairs"].push_back(
        json{{"id", i},
             {"dir", name},
             {"seed_a", set.pairs[i].seed_a},
             {"seed_b", set.pairs[i].seed_b},
             {"label_a", pair.a.label},
             {"label_b", pair.b.label},
             {"hash", hash_hex(pair_hash(pair))}});
  }
  write_file_atomic(root / "manifest.json", manifest.dump(2) + "\n");
  write_file_atomic(fs::path(cfg.out_dir) / "config.json",
                    run_config_to_json(cfg) + "\n");
}

namespace {

std::string cell_name(std::size_t pair_id, ModelKind kind) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "pair%03zu_%s", pair_id,
                to_string(kind).c_str());
  return std::string(buf);
}

json scores_to_json(const CellOutcome& o) {
  auto triple = [](const BssScores& s) {
    return json{{"sdr", s.sdr}, {"sir", s.sir}, {"sar", s.sar}};
  };
  return json{{"pair_id", o.pair_id},
              {"model_kind", to_string(o.kind)},
              {"source0", triple(o.source_scores[0])},
              {"source1", triple(o.source_scores[1])},
              {"mean", triple(o.mean)},
              {"runtime_s", o.runtime_s},
              {"corpus_hash", hash_hex(o.corpus_hash)}};
}

bool try_load_scores(const fs::path& path, CellOutcome& out) {
  if (!fs::exists(path)) return false;
  try {
    json j = json::parse(read_file(path));
    auto triple = [](const json& t, BssScores& s) {
      s.sdr = t.at("sdr").get<double>();
      s.sir = t.at("sir").get<double>();
      s.sar = t.at("sar").get<double>();
    };
    out.pair_id = j.at("pair_id").get<std::size_t>();
    out.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    triple(j.at("source0"), out.source_scores[0]);
    triple(j.at("source1"), out.source_scores[1]);
    triple(j.at("mean"), out.mean);
    out.runtime_s = j.at("runtime_s").get<double>();
    out.corpus_hash =
        std::stoull(j.at("corpus_hash").get<std::string>(), nullptr, 16);
    out.reused = true;
    return true;
  } catch (...) {
    return false;  // corrupt marker: recompute the cell
  }
}

CellOutcome run_cell(const RunConfig& cfg, const ExperimentSet& set,
                     std::size_t pair_id, ModelKind kind) {
  const fs::path dir = fs::path(cfg.out_dir) / "cells" / cell_name(pair_id, kind);

  CellOutcome cached;
  if (try_load_scores(dir / "scores.json", cached)) return cached;

  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);

  MaterializedPair pair = materialize_pair(set, pair_id);

  TrainConfig tc = cfg.train;
  tc.model_kind = kind;
  tc.seed = derive_seed(cfg.seed, pair_id, static_cast<std::uint64_t>(kind), 1);
  TrainedSourceModel model_a = train_source_model(pair.a.train_frames.mag, tc);
  tc.seed = derive_seed(cfg.seed, pair_id, static_cast<std::uint64_t>(kind), 2);
  TrainedSourceModel model_b = train_source_model(pair.b.train_frames.mag, tc);

  save_checkpoint((dir / "model_a.json").string(), model_a);
  save_checkpoint((dir / "model_b.json").string(), model_b);
  write_file_atomic(dir / "loss_a.csv", curve_csv(model_a.loss_curve, "loss"));
  write_file_atomic(dir / "loss_b.csv", curve_csv(model_b.loss_curve, "loss"));

  SeparationConfig sc = cfg.separation;
  sc.seed = derive_seed(cfg.seed, pair_id, static_cast<std::uint64_t>(kind), 3);
  SeparationResult sep = separate(pair.mix_mag.mag, model_a, model_b, sc);
  write_file_atomic(dir / "trace.csv",
                    curve_csv(sep.objective_trace, "objective"));

  auto [est1, est2] =
      wiener_reconstruct(sep.s1_hat, sep.s2_hat, pair.mix_mag, pair.mix_phase);
  write_wav((dir / "estimate_1.wav").string(), est1);
  write_wav((dir / "estimate_2.wav").string(), est2);

  PairScores scores =
      score_pair(est1, est2, pair.mix.a_scaled, pair.mix.b_scaled);

  CellOutcome o;
  o.pair_id = pair_id;
  o.kind = kind;
  o.source_scores[0] = scores.per_source[0];
  o.source_scores[1] = scores.per_source[1];
  o.mean = scores.mean;
  o.corpus_hash = pair_hash(pair);
  o.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_file_atomic(dir / "scores.json", scores_to_json(o).dump(2) + "\n");
  return o;
}

std::string results_csv(const std::vector<CellOutcome>& outcomes,
                        std::uint64_t corpus_hash) {
  std::string out = "# corpus_hash=" + hash_hex(corpus_hash) + "\n";
  out += "pair_id,model_kind,source_id,sdr_db,sir_db,sar_db\n";
  for (const CellOutcome& o : outcomes) {
    for (int s = 0; s < 2; ++s) {
      out += std::to_string(o.pair_id) + "," + to_string(o.kind) + "," +
             std::to_string(s) + "," + fmt_double(o.source_scores[s].sdr) +
             "," + fmt_double(o.source_scores[s].sir) + "," +
             fmt_double(o.source_scores[s].sar) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const RunConfig& cfg,
                        const std::vector<CellOutcome>& outcomes) {
  std::string out = "model_kind,metric,median,q1,q3,min,max,count\n";
  for (ModelKind kind : cfg.models) {
    std::vector<double> sdr, sir, sar;
    for (const CellOutcome& o : outcomes) {
      if (o.kind != kind) continue;
      sdr.push_back(o.mean.sdr);
      sir.push_back(o.mean.sir);
      sar.push_back(o.mean.sar);
    }
    if (sdr.empty()) continue;
    const std::pair<const char*, std::vector<double>*> metrics[] = {
        {"sdr", &sdr}, {"sir", &sir}, {"sar", &sar}};
    for (const auto& [name, values] : metrics) {
      DistributionSummary s = aggregate(*values);
      out += to_string(kind) + std::string(",") + name + "," +
             fmt_double(s.median) + "," + fmt_double(s.q1) + "," +
             fmt_double(s.q3) + "," + fmt_double(s.min) + "," +
             fmt_double(s.max) + "," + std::to_string(s.count) + "\n";
    }
  }
  return out;
}

std::string timings_csv(const std::vector<CellOutcome>& outcomes) {
  std::string out = "pair_id,model_kind,runtime_s\n";
  for (const CellOutcome& o : outcomes) {
    out += std::to_string(o.pair_id) + "," + to_string(o.kind) + "," +
           fmt_double(o.runtime_s) + "\n";
  }
  return out;
}

}  // namespace

std::vector<CellOutcome> run_experiment(const RunConfig& raw) {
  const RunConfig cfg = raw.normalized();
  fs::create_directories(cfg.out_dir);
  write_file_atomic(fs::path(cfg.out_dir) / "config.json",
                    run_config_to_json(cfg) + "\n");

  ExperimentSet set = build_experiment_set(cfg.corpus);

  struct Cell {
    std::size_t pair_id;
    ModelKind kind;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < set.pairs.size(); ++p) {
    for (ModelKind kind : cfg.models) cells.push_back({p, kind});
  }

  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      try {
        outcomes[i] = run_cell(cfg, set, cells[i].pair_id, cells[i].kind);
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "[%zu/%zu] %s %s sdr=%.2f dB%s\n", i + 1,
                     cells.size(), cell_name(cells[i].pair_id, cells[i].kind).c_str(),
                     outcomes[i].reused ? "(cached)" : "done",
                     outcomes[i].mean.sdr, outcomes[i].reused ? "" : "");
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n_workers = std::min(cfg.jobs, cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // each pair contributes once to the corpus hash, not once per model
  std::uint64_t corpus_hash = 0;
  {
    std::vector<std::uint64_t> per_pair(set.pairs.size(), 0);
    for (const CellOutcome& o : outcomes) per_pair[o.pair_id] = o.corpus_hash;
    for (std::uint64_t h : per_pair) corpus_hash ^= h;
  }

  write_file_atomic(fs::path(cfg.out_dir) / "results.csv",
                    results_csv(outcomes, corpus_hash));
  write_file_atomic(fs::path(cfg.out_dir) / "summary.csv",
                    summary_csv(cfg, outcomes));
  write_file_atomic(fs::path(cfg.out_dir) / "timings.csv",
                    timings_csv(outcomes));
  return outcomes;
}

}  // namespace gensep
