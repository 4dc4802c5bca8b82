#pragma once

#include <string>
#include <vector>

#include "gensep/corpus.hpp"
#include "gensep/evaluation.hpp"
#include "gensep/separation.hpp"
#include "gensep/training.hpp"

namespace gensep {

// Everything one run needs, serialized as a single JSON document and echoed
// verbatim into the output directory.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out_dir = "out";
  std::vector<ModelKind> models = {ModelKind::Nmf,  ModelKind::Gan,
                                   ModelKind::Wgan, ModelKind::AeWgan,
                                   ModelKind::MlAe, ModelKind::Vae};
  CorpusConfig corpus;
  TrainConfig train;
  SeparationConfig separation;

  // Fills derived fields (per-section seeds, latent dim = data dim when left
  // at 0) and validates everything. Throws ConfigError.
  RunConfig normalized() const;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Writes per-pair source/test/mixture WAVs plus a corpus manifest under
// out_dir/corpus. Byte-identical for identical (config, seed).
void cmd_synth(const RunConfig& cfg);

struct CellOutcome {
  std::size_t pair_id = 0;
  ModelKind kind = ModelKind::Nmf;
  BssScores source_scores[2];
  BssScores mean;
  double runtime_s = 0.0;
  std::uint64_t corpus_hash = 0;
  bool reused = false;  // cell found complete and skipped
};

// Full grid: for every pair x enabled model, train both source models,
// separate the 0 dB mixture, reconstruct and score. Resumable: finished
// cells (a parseable scores.json) are not recomputed. Emits results.csv,
// summary.csv and timings.csv under out_dir.
std::vector<CellOutcome> run_experiment(const RunConfig& cfg);

}  // namespace gensep
