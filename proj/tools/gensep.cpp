// gensep: generative source separation experiments from the command line.
//
// Subcommands: synth, train, separate, evaluate, experiment.
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gensep/checkpoint.hpp"
#include "gensep/errors.hpp"
#include "gensep/evaluation.hpp"
#include "gensep/experiment.hpp"
#include "gensep/separation.hpp"
#include "gensep/spectrogram.hpp"

namespace fs = std::filesystem;
using namespace gensep;

namespace {

struct CliOptions {
  std::string config_path;
  RunConfig cfg;
  std::vector<std::string> model_names;
};

// Flags override --config values, which override defaults.
void add_shared_options(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path,
                  "JSON run configuration (flags override its fields)");
  cmd->add_option("--out", opt.cfg.out_dir, "output directory");
  cmd->add_option("--seed", opt.cfg.seed, "master seed");
  cmd->add_option("--jobs", opt.cfg.jobs,
                  "parallel (pair, model) cells in `experiment`");
  cmd->add_option("--models", opt.model_names,
                  "model kinds: nmf ml_ae vae gan wgan ae_wgan")
      ->delimiter(',');
  cmd->add_option("--pairs", opt.cfg.corpus.pairs, "number of speaker pairs");
  cmd->add_option("--train-seconds", opt.cfg.corpus.train_seconds,
                  "training audio per source");
  cmd->add_option("--test-seconds", opt.cfg.corpus.test_seconds,
                  "test utterance length");
  cmd->add_option("--sample-rate", opt.cfg.corpus.sample_rate, "Hz");
  cmd->add_option("--n-fft", opt.cfg.corpus.n_fft, "FFT size (power of two)");
  cmd->add_option("--hop", opt.cfg.corpus.hop, "hop size in samples");
  cmd->add_option("--iterations", opt.cfg.train.iterations,
                  "training iterations");
  cmd->add_option("--batch-size", opt.cfg.train.batch_size, "frames per batch");
  cmd->add_option("--learning-rate", opt.cfg.train.learning_rate,
                  "optimizer step size (training and separation)");
  cmd->add_option("--critic-steps", opt.cfg.train.critic_steps_per_gen,
                  "critic updates per generator update");
  cmd->add_option("--clip", opt.cfg.train.clip_hi,
                  "critic weight clip magnitude (wgan)");
  cmd->add_option("--hidden-units", opt.cfg.train.hidden_units,
                  "generator hidden layer width");
  cmd->add_option("--critic-hidden", opt.cfg.train.critic_hidden,
                  "critic hidden layer width");
  cmd->add_option("--nmf-rank", opt.cfg.train.nmf_rank, "dictionary columns");
  cmd->add_option("--vae-latent", opt.cfg.train.vae_latent,
                  "vae latent dimension");
  cmd->add_option("--alpha", opt.cfg.separation.alpha, "critic-score weight");
  cmd->add_option("--beta", opt.cfg.separation.beta, "smoothness weight");
  cmd->add_option("--test-iterations", opt.cfg.separation.iterations,
                  "latent optimization iterations");
}

// Re-reads the config file first, then re-applies any explicitly set flags.
RunConfig resolve_config(const CLI::App* cmd, CliOptions& opt) {
  RunConfig resolved;
  if (!opt.config_path.empty()) resolved = load_run_config(opt.config_path);

  if (cmd->count("--out")) resolved.out_dir = opt.cfg.out_dir;
  if (cmd->count("--seed")) resolved.seed = opt.cfg.seed;
  if (cmd->count("--jobs")) resolved.jobs = opt.cfg.jobs;
  if (cmd->count("--models")) {
    resolved.models.clear();
    for (const std::string& name : opt.model_names) {
      resolved.models.push_back(parse_model_kind(name));
    }
  }
  if (cmd->count("--pairs")) resolved.corpus.pairs = opt.cfg.corpus.pairs;
  if (cmd->count("--train-seconds"))
    resolved.corpus.train_seconds = opt.cfg.corpus.train_seconds;
  if (cmd->count("--test-seconds"))
    resolved.corpus.test_seconds = opt.cfg.corpus.test_seconds;
  if (cmd->count("--sample-rate"))
    resolved.corpus.sample_rate = opt.cfg.corpus.sample_rate;
  if (cmd->count("--n-fft")) resolved.corpus.n_fft = opt.cfg.corpus.n_fft;
  if (cmd->count("--hop")) resolved.corpus.hop = opt.cfg.corpus.hop;
  if (cmd->count("--iterations"))
    resolved.train.iterations = opt.cfg.train.iterations;
  if (cmd->count("--batch-size"))
    resolved.train.batch_size = opt.cfg.train.batch_size;
  if (cmd->count("--learning-rate")) {
    resolved.train.learning_rate = opt.cfg.train.learning_rate;
    resolved.separation.learning_rate = opt.cfg.train.learning_rate;
  }
  if (cmd->count("--critic-steps"))
    resolved.train.critic_steps_per_gen = opt.cfg.train.critic_steps_per_gen;
  if (cmd->count("--clip")) {
    resolved.train.clip_hi = opt.cfg.train.clip_hi;
    resolved.train.clip_lo = -opt.cfg.train.clip_hi;
  }
  if (cmd->count("--hidden-units"))
    resolved.train.hidden_units = opt.cfg.train.hidden_units;
  if (cmd->count("--critic-hidden"))
    resolved.train.critic_hidden = opt.cfg.train.critic_hidden;
  if (cmd->count("--nmf-rank")) resolved.train.nmf_rank = opt.cfg.train.nmf_rank;
  if (cmd->count("--vae-latent"))
    resolved.train.vae_latent = opt.cfg.train.vae_latent;
  if (cmd->count("--alpha")) resolved.separation.alpha = opt.cfg.separation.alpha;
  if (cmd->count("--beta")) resolved.separation.beta = opt.cfg.separation.beta;
  if (cmd->count("--test-iterations"))
    resolved.separation.iterations = opt.cfg.separation.iterations;
  return resolved;
}

MagnitudeSpectrogram frames_of(const Waveform& w, const RunConfig& cfg) {
  return magnitude_phase(stft(w, cfg.corpus.n_fft, cfg.corpus.hop)).first;
}

std::string fmt_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void do_train(const RunConfig& raw, const std::string& pair_dir,
              const std::string& wav_dir_a, const std::string& wav_dir_b,
              const std::string& kind_name) {
  const RunConfig cfg = raw.normalized();
  const ModelKind kind = parse_model_kind(kind_name);
  fs::create_directories(cfg.out_dir);

  Mat frames_a, frames_b;
  if (!pair_dir.empty()) {
    Waveform a = read_wav((fs::path(pair_dir) / "a_train.wav").string());
    Waveform b = read_wav((fs::path(pair_dir) / "b_train.wav").string());
    if (a.sample_rate != cfg.corpus.sample_rate ||
        b.sample_rate != cfg.corpus.sample_rate) {
      throw InputError("train: corpus sample rate differs from configuration");
    }
    frames_a = frames_of(a, cfg).mag;
    frames_b = frames_of(b, cfg).mag;
  } else if (!wav_dir_a.empty() && !wav_dir_b.empty()) {
    frames_a = ingest_wav_dir(wav_dir_a, cfg.corpus.sample_rate,
                              cfg.corpus.n_fft, cfg.corpus.hop)
                   .train_frames.mag;
    frames_b = ingest_wav_dir(wav_dir_b, cfg.corpus.sample_rate,
                              cfg.corpus.n_fft, cfg.corpus.hop)
                   .train_frames.mag;
  } else {
    throw ConfigError("train: need --pair-dir, or both --wav-dir-a and "
                      "--wav-dir-b");
  }

  TrainConfig tc = cfg.train;
  tc.model_kind = kind;
  tc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(kind), 1);
  TrainedSourceModel model_a = train_source_model(frames_a, tc);
  tc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(kind), 2);
  TrainedSourceModel model_b = train_source_model(frames_b, tc);

  const fs::path out(cfg.out_dir);
  save_checkpoint((out / "model_a.json").string(), model_a);
  save_checkpoint((out / "model_b.json").string(), model_b);
  auto dump_curve = [&](const TrainedSourceModel& m, const char* name) {
    std::ofstream f(out / name, std::ios::trunc);
    f << "iteration,loss\n";
    for (const auto& [it, v] : m.loss_curve) f << it << "," << fmt_db(v) << "\n";
  };
  dump_curve(model_a, "loss_a.csv");
  dump_curve(model_b, "loss_b.csv");
  std::printf("wrote %s/model_a.json and model_b.json (%s)\n",
              cfg.out_dir.c_str(), to_string(kind).c_str());
}

void do_separate(const RunConfig& raw, const std::string& model_a_path,
                 const std::string& model_b_path,
                 const std::string& mixture_path) {
  const RunConfig cfg = raw.normalized();
  fs::create_directories(cfg.out_dir);

  TrainedSourceModel model_a = load_checkpoint(model_a_path);
  TrainedSourceModel model_b = load_checkpoint(model_b_path);
  Waveform mixture = read_wav(mixture_path);
  auto spec = stft(mixture, cfg.corpus.n_fft, cfg.corpus.hop);
  auto [mag, phase] = magnitude_phase(spec);

  SeparationConfig sc = cfg.separation;
  sc.seed = derive_seed(cfg.seed, 0x5E9A);
  SeparationResult res = separate(mag.mag, model_a, model_b, sc);

  auto [est1, est2] = wiener_reconstruct(res.s1_hat, res.s2_hat, mag, phase);
  const fs::path out(cfg.out_dir);
  write_wav((out / "estimate_1.wav").string(), est1);
  write_wav((out / "estimate_2.wav").string(), est2);
  std::ofstream trace(out / "trace.csv", std::ios::trunc);
  trace << "iteration,objective\n";
  for (const auto& [it, v] : res.objective_trace) {
    trace << it << "," << fmt_db(v) << "\n";
  }
  std::printf("wrote %s/estimate_1.wav, estimate_2.wav, trace.csv\n",
              cfg.out_dir.c_str());
}

void do_evaluate(const std::string& est1_path, const std::string& est2_path,
                 const std::string& ref1_path, const std::string& ref2_path,
                 const std::string& out_path) {
  Waveform e1 = read_wav(est1_path);
  Waveform e2 = read_wav(est2_path);
  Waveform r1 = read_wav(ref1_path);
  Waveform r2 = read_wav(ref2_path);
  PairScores p = score_pair(e1, e2, r1, r2);

  std::string csv = "source_id,sdr_db,sir_db,sar_db\n";
  for (int s = 0; s < 2; ++s) {
    csv += std::to_string(s) + "," + fmt_db(p.per_source[s].sdr) + "," +
           fmt_db(p.per_source[s].sir) + "," + fmt_db(p.per_source[s].sar) +
           "\n";
  }
  csv += "mean," + fmt_db(p.mean.sdr) + "," + fmt_db(p.mean.sir) + "," +
         fmt_db(p.mean.sar) + "\n";
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::ofstream f(out_path, std::ios::trunc);
    if (!f) throw InputError("cannot write " + out_path);
    f << csv;
    std::printf("wrote %s\n", out_path.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generative source separation experiments"};
  app.require_subcommand(1);

  CliOptions opt;

  CLI::App* synth = app.add_subcommand(
      "synth", "generate the synthetic corpus (WAVs + manifest)");
  add_shared_options(synth, opt);

  CLI::App* train = app.add_subcommand(
      "train", "train one model kind on a source pair, emit checkpoints");
  add_shared_options(train, opt);
  std::string pair_dir, wav_dir_a, wav_dir_b, kind_name = "wgan";
  train->add_option("--pair-dir", pair_dir,
                    "a pairNNN directory produced by `synth`");
  train->add_option("--wav-dir-a", wav_dir_a,
                    "directory of WAV utterances for source A");
  train->add_option("--wav-dir-b", wav_dir_b,
                    "directory of WAV utterances for source B");
  train->add_option("--model", kind_name,
                    "nmf | ml_ae | vae | gan | wgan | ae_wgan");

  CLI::App* separate_cmd = app.add_subcommand(
      "separate", "separate a mixture WAV with two trained checkpoints");
  add_shared_options(separate_cmd, opt);
  std::string model_a_path, model_b_path, mixture_path;
  separate_cmd->add_option("--model-a", model_a_path, "checkpoint for source A")
      ->required();
  separate_cmd->add_option("--model-b", model_b_path, "checkpoint for source B")
      ->required();
  separate_cmd->add_option("--mixture", mixture_path, "mixture WAV")
      ->required();

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score estimates against references (SDR/SIR/SAR)");
  std::string est1, est2, ref1, ref2, scores_out;
  evaluate->add_option("--estimate1", est1, "estimated source 1")->required();
  evaluate->add_option("--estimate2", est2, "estimated source 2")->required();
  evaluate->add_option("--reference1", ref1, "true source 1")->required();
  evaluate->add_option("--reference2", ref2, "true source 2")->required();
  evaluate->add_option("--scores-out", scores_out,
                       "CSV path (default: stdout)");

  CLI::App* experiment = app.add_subcommand(
      "experiment", "full grid: train, separate and score every pair x model");
  add_shared_options(experiment, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      cmd_synth(resolve_config(synth, opt));
    } else if (train->parsed()) {
      do_train(resolve_config(train, opt), pair_dir, wav_dir_a, wav_dir_b,
               kind_name);
    } else if (separate_cmd->parsed()) {
      do_separate(resolve_config(separate_cmd, opt), model_a_path, model_b_path,
                  mixture_path);
    } else if (evaluate->parsed()) {
      do_evaluate(est1, est2, ref1, ref2, scores_out);
    } else if (experiment->parsed()) {
      run_experiment(resolve_config(experiment, opt));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
  return 0;
}
