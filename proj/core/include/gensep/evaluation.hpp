#pragma once

#include <array>
#include <vector>

#include "gensep/audio.hpp"

namespace gensep {

// Source separation quality in dB, capped at +/-200 for degenerate
// zero-error cases so aggregation stays finite.
struct BssScores {
  double sdr = 0.0;
  double sir = 0.0;
  double sar = 0.0;
};

inline constexpr double kBssCapDb = 200.0;

// The estimate split into a target component (projection onto the target
// reference), an interference component (the rest of its projection onto the
// span of both references) and an artifact remainder. The three components
// sum back to the (trimmed) estimate exactly.
struct BssDecomposition {
  std::vector<double> s_target;
  std::vector<double> e_interf;
  std::vector<double> e_artif;
};

BssDecomposition bss_decompose(const Waveform& estimate,
                               const std::array<Waveform, 2>& references,
                               std::size_t target_index);

// Whole-signal (time-invariant) projection variant:
//   SDR = 10 log10 ||s_target||^2 / ||e_interf + e_artif||^2
//   SIR = 10 log10 ||s_target||^2 / ||e_interf||^2
//   SAR = 10 log10 ||s_target + e_interf||^2 / ||e_artif||^2
// Signals are trimmed to the shortest length first.
BssScores bss_eval(const Waveform& estimate,
                   const std::array<Waveform, 2>& references,
                   std::size_t target_index);

struct PairScores {
  std::array<BssScores, 2> per_source;  // indexed by reference
  BssScores mean;
  bool swapped = false;  // true when estimate 2 was assigned to reference 1
};

// Resolves the estimate-to-reference permutation by maximizing mean SDR,
// then averages the two sources' scores.
PairScores score_pair(const Waveform& estimate1, const Waveform& estimate2,
                      const Waveform& reference1, const Waveform& reference2);

struct DistributionSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Exact order statistics with linear interpolation between ranks.
DistributionSummary aggregate(std::vector<double> values);

}  // namespace gensep
