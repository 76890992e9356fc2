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

// Recursive residual correction around DSA: the component-inner loop (rdsa1)
// and the scale-block driver (rdsa2), plus the eta convergence diagnostic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/dsa.hpp"
#include "mmd/errors.hpp"

namespace mmd {

struct RdsaConfig {
  int J1 = 10;
  int J2 = 200;
  int M0 = 0;
  /// Empty selects the full band {-M0..M0}; otherwise the ring (M0, M1).
  std::optional<int> M1;
  int block = 1;
  double epsilon = 1e-6;
  double epsilon1 = 1e-6;
  double epsilon2 = 1e-6;
  std::size_t shape_size = 1000;
  double nufft_tolerance = 1e-9;
  bool limit_to_resolvable_band = true;
  std::size_t threads = 0;

  void validate() const {
    detail::require(J1 >= 1 && J2 >= 1, "iteration budgets J1 and J2 must be at least 1");
    detail::require(block >= 1, "block size must be at least 1");
    detail::require(M0 >= 0, "M0 must be nonnegative");
    detail::require(!M1 || *M1 > M0, "M1 must exceed M0");
    detail::require(epsilon > 0.0 && epsilon1 > 0.0 && epsilon2 > 0.0,
                    "accuracy thresholds must be positive");
    detail::require(shape_size >= 2 && shape_size % 2 == 0, "L_s must be even");
  }
};

/// {-M0..M0}.
inline std::vector<int> full_band(int M0) {
  detail::require(M0 >= 0, "M0 must be nonnegative");
  std::vector<int> s;
  for (int n = -M0; n <= M0; ++n) s.push_back(n);
  return s;
}

/// {-M1+1..-M0} u {M0..M1-1}, ascending and without duplicates.
inline std::vector<int> ring_band(int M0, int M1) {
  detail::require(M0 >= 0 && M1 > M0, "ring band needs 0 <= M0 < M1");
  std::vector<int> s;
  for (int n = -M1 + 1; n <= -M0; ++n) s.push_back(n);
  for (int n = M0; n <= M1 - 1; ++n)
    if (s.empty() || n > s.back()) s.push_back(n);
  return s;
}

/// mu_j = log|e_{j-1} - e_j|, cut at the first difference <= 1e-15;
/// eta_j = mu_j - mu_{j+1}.
inline std::vector<double> convergence_eta(std::span<const double> residuals) {
  detail::require(residuals.size() >= 3,
                  "convergence trace needs at least 3 residual entries");
  std::vector<double> mu;
  for (std::size_t j = 1; j < residuals.size(); ++j) {
    const double d = std::abs(residuals[j - 1] - residuals[j]);
    if (!(d > 1e-15)) break;
    mu.push_back(std::log(d));
  }
  std::vector<double> eta;
  for (std::size_t j = 0; j + 1 < mu.size(); ++j) eta.push_back(mu[j] - mu[j + 1]);
  return eta;
}

inline std::vector<double> convergence_eta(const ConvergenceTrace& trace) {
  return convergence_eta(std::span<const double>(trace.relative_residuals));
}

namespace detail {

/// Accumulated, unnormalized state in input component order.
struct RdsaState {
  std::vector<std::map<int, std::vector<double>>> raw_c;
  std::vector<std::map<int, std::vector<double>>> raw_s;
  std::vector<std::vector<double>> estimate;
  std::vector<double> residual;
  ConvergenceTrace trace;
};

inline std::vector<DsaPlan> make_plans(std::span<const PhaseTrack> phases, std::size_t L,
                                       const RdsaConfig& cfg) {
  require(!phases.empty(), "at least one phase is required");
  DsaSettings settings;
  settings.shape_size = cfg.shape_size;
  settings.nufft_tolerance = cfg.nufft_tolerance;
  settings.limit_to_resolvable_band = cfg.limit_to_resolvable_band;
  settings.threads = cfg.threads;
  std::vector<DsaPlan> plans;
  plans.reserve(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    require(phases[k].size() == L, "phase " + std::to_string(k) + " has length " +
                                       std::to_string(phases[k].size()) +
                                       ", signal has " + std::to_string(L));
    plans.emplace_back(phases[k], settings, true);
  }
  return plans;
}

/// Visiting order: ascending N_eff, ties in input order.
inline std::vector<std::size_t> component_order(std::span<const DsaPlan> plans) {
  std::vector<std::size_t> order(plans.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plans[a].effective_n() < plans[b].effective_n();
  });
  return order;
}

inline void add_into(std::vector<double>& acc, std::span<const double> v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

inline double relative_norm(std::span<const double> r, double c) {
  return c > 0.0 ? grid_norm(r) / c : 0.0;
}

inline RdsaState rdsa1_state(std::span<const double> f, std::span<const DsaPlan> plans,
                             std::span<const int> scale_set, int J1, double epsilon) {
  const std::size_t K = plans.size();
  const std::size_t L = f.size();
  RdsaState st;
  st.raw_c.resize(K);
  st.raw_s.resize(K);
  st.estimate.assign(K, std::vector<double>(L, 0.0));
  st.residual.assign(f.begin(), f.end());
  for (std::size_t k = 0; k < K; ++k)
    for (int n : scale_set) {
      st.raw_c[k][n].assign(plans[k].shape_size(), 0.0);
      st.raw_s[k][n].assign(plans[k].shape_size(), 0.0);
    }

  const double c = grid_norm(f);
  if (c == 0.0) {
    st.trace.relative_residuals = {0.0};
    st.trace.stop_reason = StopReason::tolerance_met;
    return st;
  }
  st.trace.relative_residuals = {1.0};
  st.trace.stop_reason = StopReason::max_iterations;

  const std::vector<std::size_t> order = component_order(plans);
  double e = 1.0;
  for (int j = 1; j <= J1; ++j) {
    for (std::size_t k : order) {
      DsaOutput out = plans[k].run(UniformSignal(st.residual), scale_set);
      for (int n : scale_set) {
        add_into(st.raw_c[k][n], out.raw_c.at(n).values());
        add_into(st.raw_s[k][n], out.raw_s.at(n).values());
      }
      for (std::size_t l = 0; l < L; ++l) {
        st.estimate[k][l] += out.f_c[l] + out.f_s[l];
        st.residual[l] = st.residual[l] - out.f_c[l] - out.f_s[l];
      }
    }
    const double rel = relative_norm(st.residual, c);
    st.trace.relative_residuals.push_back(rel);
    if (rel <= epsilon) {
      st.trace.stop_reason = StopReason::tolerance_met;
      break;
    }
    if (rel >= e - epsilon) {
      st.trace.stop_reason = StopReason::stagnated;
      break;
    }
    e = rel;
  }
  return st;
}

inline DecompositionResult finalize(const RdsaState& st, std::span<const double> f,
                                    std::span<const DsaPlan> plans) {
  const std::size_t K = plans.size();
  const std::size_t L = f.size();
  DecompositionResult result;
  std::vector<double> residual(f.begin(), f.end());
  for (std::size_t k = 0; k < K; ++k) {
    MimfExpansion exp(plans[k].fundamental(), plans[k].shape_size());
    for (const auto& [n, rc] : st.raw_c[k]) {
      auto [a, sc] = normalize_shape(ShapeTable::zero_mean(rc));
      auto [b, ss] = normalize_shape(ShapeTable::zero_mean(st.raw_s[k].at(n)));
      exp.set(n, ScaleTerm{a, b, std::move(sc), std::move(ss)});
    }
    result.expansions.push_back(std::move(exp));
    result.components.emplace_back(st.estimate[k]);
    for (std::size_t l = 0; l < L; ++l) residual[l] -= st.estimate[k][l];
  }
  result.residual = UniformSignal(std::move(residual));
  result.trace = st.trace;
  if (result.trace.relative_residuals.size() >= 3)
    result.trace.eta = convergence_eta(result.trace);
  return result;
}

inline std::vector<int> config_band(const RdsaConfig& cfg) {
  return cfg.M1 ? ring_band(cfg.M0, *cfg.M1) : full_band(cfg.M0);
}

}  // namespace detail

/// Algorithm with the component loop innermost. The band is {-M0..M0}, or
/// the ring (M0, M1) when cfg.M1 is set. Stops on cfg.epsilon.
inline DecompositionResult rdsa1(const UniformSignal& f, std::span<const PhaseTrack> phases,
                                 const RdsaConfig& cfg) {
  cfg.validate();
  const std::vector<DsaPlan> plans = detail::make_plans(phases, f.size(), cfg);
  const std::vector<int> band = detail::config_band(cfg);
  detail::RdsaState st = detail::rdsa1_state(f.samples(), plans, band, cfg.J1, cfg.epsilon);
  return detail::finalize(st, f.samples(), plans);
}

/// Block driver: each outer sweep runs rdsa1 over rings (m, m + b) for
/// m = 0, b, 2b, ... up to M0, the last ring truncated at M0 + 1. The inner
/// runs stop on epsilon2, the outer loop on epsilon1.
inline DecompositionResult rdsa2(const UniformSignal& f, std::span<const PhaseTrack> phases,
                                 const RdsaConfig& cfg) {
  cfg.validate();
  const std::vector<DsaPlan> plans = detail::make_plans(phases, f.size(), cfg);
  const std::size_t K = plans.size();
  const std::size_t L = f.size();

  detail::RdsaState acc;
  acc.raw_c.resize(K);
  acc.raw_s.resize(K);
  acc.estimate.assign(K, std::vector<double>(L, 0.0));
  acc.residual.assign(f.samples().begin(), f.samples().end());
  for (std::size_t k = 0; k < K; ++k)
    for (int n : full_band(cfg.M0)) {
      acc.raw_c[k][n].assign(cfg.shape_size, 0.0);
      acc.raw_s[k][n].assign(cfg.shape_size, 0.0);
    }

  const double c = f.norm();
  if (c == 0.0) {
    acc.trace.relative_residuals = {0.0};
    acc.trace.stop_reason = StopReason::tolerance_met;
    return detail::finalize(acc, f.samples(), plans);
  }
  acc.trace.relative_residuals = {1.0};
  acc.trace.stop_reason = StopReason::max_iterations;

  double e = 1.0;
  for (int j = 1; j <= cfg.J2; ++j) {
    for (int m = 0; m <= cfg.M0; m += cfg.block) {
      const int upper = std::min(m + cfg.block, cfg.M0 + 1);
      const std::vector<int> ring = ring_band(m, upper);
      detail::RdsaState inner =
          detail::rdsa1_state(acc.residual, plans, ring, cfg.J1, cfg.epsilon2);
      for (std::size_t k = 0; k < K; ++k) {
        for (int n : ring) {
          detail::add_into(acc.raw_c[k][n], inner.raw_c[k].at(n));
          detail::add_into(acc.raw_s[k][n], inner.raw_s[k].at(n));
        }
        for (std::size_t l = 0; l < L; ++l) acc.estimate[k][l] += inner.estimate[k][l];
      }
      // Equal to the residual minus every inner estimate; taken from the
      // inner run so one full-width block reproduces rdsa1 exactly.
      acc.residual = std::move(inner.residual);
    }
    const double rel = detail::relative_norm(acc.residual, c);
    acc.trace.relative_residuals.push_back(rel);
    if (rel <= cfg.epsilon1) {
      acc.trace.stop_reason = StopReason::tolerance_met;
      break;
    }
    if (rel >= e - cfg.epsilon1) {
      acc.trace.stop_reason = StopReason::stagnated;
      break;
    }
    e = rel;
  }
  return detail::finalize(acc, f.samples(), plans);
}

}  // namespace mmd
