#include "gensep/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "gensep/errors.hpp"

namespace gensep {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b,
           std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double capped_db(double num, double den) {
  if (num <= 0.0) return -kBssCapDb;
  if (den <= 0.0) return kBssCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kBssCapDb, kBssCapDb);
}

}  // namespace

BssDecomposition bss_decompose(const Waveform& estimate,
                               const std::array<Waveform, 2>& references,
                               std::size_t target_index) {
  if (target_index > 1) throw ConfigError("bss_eval: target_index must be 0/1");
  const std::size_t n = std::min({estimate.samples.size(),
                                  references[0].samples.size(),
                                  references[1].samples.size()});
  if (n == 0) throw InputError("bss_eval: empty signal");

  const auto& e = estimate.samples;
  const auto& r0 = references[0].samples;
  const auto& r1 = references[1].samples;

  const double g00 = dot(r0, r0, n);
  const double g11 = dot(r1, r1, n);
  const double g01 = dot(r0, r1, n);
  const double ee = dot(e, e, n);
  if (g00 <= 0.0 || g11 <= 0.0) {
    throw InputError("bss_eval: zero-energy reference");
  }
  if (ee <= 0.0) throw InputError("bss_eval: zero-energy estimate");

  const double det = g00 * g11 - g01 * g01;
  if (det <= 1e-12 * g00 * g11) {
    throw NumericalError("bss_eval: references are (near-)collinear");
  }

  const double er0 = dot(e, r0, n);
  const double er1 = dot(e, r1, n);
  // projection of the estimate onto span{r0, r1}
  const double c0 = (g11 * er0 - g01 * er1) / det;
  const double c1 = (g00 * er1 - g01 * er0) / det;
  // projection coefficient onto the target alone
  const double t_coef = target_index == 0 ? er0 / g00 : er1 / g11;

  BssDecomposition d;
  d.s_target.resize(n);
  d.e_interf.resize(n);
  d.e_artif.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double span = c0 * r0[i] + c1 * r1[i];
    d.s_target[i] = t_coef * (target_index == 0 ? r0[i] : r1[i]);
    d.e_interf[i] = span - d.s_target[i];
    d.e_artif[i] = e[i] - span;
  }
  return d;
}

BssScores bss_eval(const Waveform& estimate,
                   const std::array<Waveform, 2>& references,
                   std::size_t target_index) {
  const BssDecomposition d = bss_decompose(estimate, references, target_index);
  double target_sq = 0.0, interf_sq = 0.0, artif_sq = 0.0, distort_sq = 0.0,
         target_plus_interf_sq = 0.0;
  for (std::size_t i = 0; i < d.s_target.size(); ++i) {
    target_sq += d.s_target[i] * d.s_target[i];
    interf_sq += d.e_interf[i] * d.e_interf[i];
    artif_sq += d.e_artif[i] * d.e_artif[i];
    const double distort = d.e_interf[i] + d.e_artif[i];
    distort_sq += distort * distort;
    const double ti = d.s_target[i] + d.e_interf[i];
    target_plus_interf_sq += ti * ti;
  }

  BssScores s;
  s.sdr = capped_db(target_sq, distort_sq);
  s.sir = capped_db(target_sq, interf_sq);
  s.sar = capped_db(target_plus_interf_sq, artif_sq);
  return s;
}

PairScores score_pair(const Waveform& estimate1, const Waveform& estimate2,
                      const Waveform& reference1, const Waveform& reference2) {
  const std::array<Waveform, 2> refs = {reference1, reference2};

  const BssScores direct0 = bss_eval(estimate1, refs, 0);
  const BssScores direct1 = bss_eval(estimate2, refs, 1);
  const BssScores swapped0 = bss_eval(estimate2, refs, 0);
  const BssScores swapped1 = bss_eval(estimate1, refs, 1);

  const double direct_mean = 0.5 * (direct0.sdr + direct1.sdr);
  const double swapped_mean = 0.5 * (swapped0.sdr + swapped1.sdr);

  PairScores out;
  out.swapped = swapped_mean > direct_mean;
  out.per_source[0] = out.swapped ? swapped0 : direct0;
  out.per_source[1] = out.swapped ? swapped1 : direct1;
  out.mean.sdr = 0.5 * (out.per_source[0].sdr + out.per_source[1].sdr);
  out.mean.sir = 0.5 * (out.per_source[0].sir + out.per_source[1].sir);
  out.mean.sar = 0.5 * (out.per_source[0].sar + out.per_source[1].sar);
  return out;
}

DistributionSummary aggregate(std::vector<double> values) {
  if (values.empty()) throw InputError("aggregate: no scores");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  DistributionSummary s;
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  s.min = values.front();
  s.max = values.back();
  s.count = values.size();
  return s;
}

}  // namespace gensep
