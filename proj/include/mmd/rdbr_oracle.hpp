/* Copyright 2026 The MMD Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Partition-based regression on folded phase coordinates (RDBR) and the
// well-differentiation counts of a phase collection. Serves as an
// independent estimator for DSA and as the baseline in benchmarks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/errors.hpp"

namespace mmd {

/// Pairs (mod(v, 1), y) with a uniform partition of [0, 1) into `bins` parts.
struct FoldedSamples {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t bins = 128;

  double h() const { return 1.0 / static_cast<double>(bins); }
};

inline FoldedSamples fold(const PhaseTrack& phase, std::span<const double> responses,
                          std::size_t bins = 128) {
  detail::require(phase.size() == responses.size(),
                  "fold: phase length " + std::to_string(phase.size()) +
                      " differs from response length " + std::to_string(responses.size()));
  FoldedSamples out;
  out.bins = bins;
  out.x.resize(phase.size());
  for (std::size_t l = 0; l < phase.size(); ++l) out.x[l] = wrap_unit(phase[l]);
  out.y.assign(responses.begin(), responses.end());
  return out;
}

/// Bin k covers [k h, (k + 1) h).
inline std::size_t bin_of(double x, std::size_t bins) {
  const auto k = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
  return std::min(k, bins - 1);
}

struct PartitionEstimate {
  std::vector<double> values;
  std::vector<std::size_t> counts;
  /// 1 where the bin held samples, 0 where the value was filled.
  std::vector<std::uint8_t> occupied;

  std::size_t bins() const { return values.size(); }
  double h() const { return 1.0 / static_cast<double>(values.size()); }
  double evaluate(double x) const { return values[bin_of(wrap_unit(x), values.size())]; }
};

/// Bin means; empty bins are filled by periodic linear interpolation between
/// the nearest occupied neighbours.
inline PartitionEstimate partition_regress(const FoldedSamples& samples) {
  const std::size_t nb = samples.bins;
  detail::require(nb >= 2, "partition needs at least 2 bins");
  detail::require(samples.x.size() == samples.y.size(), "folded x and y lengths differ");
  PartitionEstimate est;
  est.values.assign(nb, 0.0);
  est.counts.assign(nb, 0);
  est.occupied.assign(nb, 0);
  for (std::size_t l = 0; l < samples.x.size(); ++l) {
    const double x = samples.x[l];
    detail::require(x >= 0.0 && x < 1.0, "folded abscissa outside [0, 1)");
    const std::size_t k = bin_of(x, nb);
    est.values[k] += samples.y[l];
    ++est.counts[k];
  }
  std::vector<std::size_t> filled;
  for (std::size_t k = 0; k < nb; ++k) {
    if (est.counts[k] == 0) continue;
    est.values[k] /= static_cast<double>(est.counts[k]);
    est.occupied[k] = 1;
    filled.push_back(k);
  }
  if (filled.empty()) throw ValidationError("partition regression: every bin is empty");
  if (filled.size() == nb) return est;

  for (std::size_t i = 0; i < filled.size(); ++i) {
    const std::size_t a = filled[i];
    const std::size_t b = filled[(i + 1) % filled.size()];
    const std::size_t gap = (b + nb - a) % nb == 0 ? nb : (b + nb - a) % nb;
    for (std::size_t d = 1; d < gap; ++d) {
      const double w = static_cast<double>(d) / static_cast<double>(gap);
      est.values[(a + d) % nb] = (1.0 - w) * est.values[a] + w * est.values[b];
    }
  }
  return est;
}

/// Regression estimate of a_n s_cn (cos) or b_n s_sn (sin) with phi = p / N:
/// responses 2^{|sgn n|} trig(2 pi n phi) f, folded at mod(p, 1).
inline PartitionEstimate rdbr_extract(const UniformSignal& signal, const PhaseTrack& phase,
                                      double N, int n, Parity parity, std::size_t bins) {
  detail::require(signal.size() == phase.size(), "signal and phase lengths differ");
  detail::require(N > 0.0, "fundamental must be positive");
  const std::size_t L = signal.size();
  const double factor = n == 0 ? 1.0 : 2.0;
  FoldedSamples s;
  s.bins = bins;
  s.x.resize(L);
  s.y.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double arg = kTwoPi * static_cast<double>(n) * (phase[l] / N);
    const double m = parity == Parity::cos ? std::cos(arg) : std::sin(arg);
    s.x[l] = wrap_unit(phase[l]);
    s.y[l] = factor * m * signal[l];
  }
  return partition_regress(s);
}

struct WellDiffReport {
  double gamma = 0.0;
  double beta = 0.0;
  double contraction = 0.0;
  std::size_t bins = 0;
  std::size_t components = 0;
  /// D^i(m), row i of length bins.
  std::vector<std::vector<std::size_t>> single_counts;
  /// D^{ij}(m, n) at [i][j][m * bins + n]; empty for i == j.
  std::vector<std::vector<std::vector<std::size_t>>> pair_counts;
  /// beta_{i,j}; 0 on the diagonal.
  std::vector<std::vector<double>> pair_beta;

  bool well_differentiated() const { return gamma > 0.0 && contraction < 1.0; }
};

/// gamma = min D^{ij}(m, n) over i != j;
/// beta_ij = sqrt(sum_m (1 / D^i(m)) sum_n (D^{ij}(m, n) - gamma)^2);
/// contraction = max beta_ij (2 M0 + 1)(K - 1).
/// phases[k][l] is p_k(t_l); sample order is irrelevant.
inline WellDiffReport well_diff_counts(std::span<const std::vector<double>> phases,
                                       std::size_t bins, int M0 = 0) {
  const std::size_t K = phases.size();
  detail::require(K >= 2, "well-differentiation needs at least two phases");
  detail::require(bins >= 1, "need at least one bin");
  detail::require(M0 >= 0, "M0 must be nonnegative");
  const std::size_t L = phases[0].size();
  for (const auto& p : phases)
    detail::require(p.size() == L, "phases have different lengths");

  WellDiffReport r;
  r.bins = bins;
  r.components = K;
  std::vector<std::vector<std::size_t>> idx(K, std::vector<std::size_t>(L));
  r.single_counts.assign(K, std::vector<std::size_t>(bins, 0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t l = 0; l < L; ++l) {
      detail::require(std::isfinite(phases[i][l]), "phase contains a non-finite value");
      idx[i][l] = bin_of(wrap_unit(phases[i][l]), bins);
      ++r.single_counts[i][idx[i][l]];
    }

  r.pair_counts.assign(K, std::vector<std::vector<std::size_t>>(K));
  std::size_t gamma = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      if (i == j) continue;
      auto& D = r.pair_counts[i][j];
      D.assign(bins * bins, 0);
      for (std::size_t l = 0; l < L; ++l) ++D[idx[i][l] * bins + idx[j][l]];
      gamma = std::min(gamma, *std::min_element(D.begin(), D.end()));
    }
  r.gamma = static_cast<double>(gamma);

  r.pair_beta.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      if (i == j) continue;
      const auto& D = r.pair_counts[i][j];
      double total = 0.0;
      for (std::size_t m = 0; m < bins; ++m) {
        double inner = 0.0;
        for (std::size_t n = 0; n < bins; ++n) {
          const double d = static_cast<double>(D[m * bins + n]) - r.gamma;
          inner += d * d;
        }
        const auto Di = r.single_counts[i][m];
        total += Di == 0 ? (inner > 0.0 ? std::numeric_limits<double>::infinity() : 0.0)
                         : inner / static_cast<double>(Di);
      }
      r.pair_beta[i][j] = std::sqrt(total);
      r.beta = std::max(r.beta, r.pair_beta[i][j]);
    }
  r.contraction = r.beta * static_cast<double>(2 * M0 + 1) * static_cast<double>(K - 1);
  return r;
}

inline WellDiffReport well_diff_report(std::span<const PhaseTrack> phases, std::size_t bins,
                                       int M0 = 0) {
  std::vector<std::vector<double>> values;
  for (const auto& p : phases) values.emplace_back(p.values().begin(), p.values().end());
  return well_diff_counts(values, bins, M0);
}

}  // namespace mmd
