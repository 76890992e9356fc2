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

// Domain types of the multiresolution mode decomposition: uniformly sampled
// signals, instantaneous phases, periodic shape tables, and the per-component
// multiresolution expansion {a_n, s_cn, b_n, s_sn}. Synthesis, banded
// approximation and the shape normalization step live here as well.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmd/errors.hpp"

namespace mmd {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fractional part in [0, 1), robust to the rounding of tiny negatives.
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Discrete L^2([0,1]) norm of grid samples: ||x||_2 / sqrt(L).
inline double grid_norm(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

// ---------------------------------------------------------------------------
// UniformSignal
// ---------------------------------------------------------------------------

/// Real samples on the grid t_l = l / L of [0, 1).
class UniformSignal {
 public:
  static constexpr std::size_t kMinLength = 16;

  UniformSignal() = default;

  explicit UniformSignal(std::vector<double> samples) : samples_(std::move(samples)) {
    detail::require(samples_.size() >= kMinLength,
                    "signal needs at least 16 samples, got " + std::to_string(samples_.size()));
    for (double v : samples_)
      detail::require(std::isfinite(v), "signal contains a non-finite sample");
  }

  static UniformSignal zeros(std::size_t length) {
    return UniformSignal(std::vector<double>(length, 0.0));
  }

  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& vector() const noexcept { return samples_; }

  /// (1/sqrt(L)) ||x||_2, so relative residuals do not depend on L.
  double norm() const { return grid_norm(samples_); }

  friend bool operator==(const UniformSignal&, const UniformSignal&) = default;

 private:
  std::vector<double> samples_;
};

// ---------------------------------------------------------------------------
// PhaseTrack
// ---------------------------------------------------------------------------

/// Samples of an instantaneous phase p(t_l) = N phi(t_l) in cycles.
class PhaseTrack {
 public:
  PhaseTrack() = default;

  /// fundamental <= 0 derives N from the sampled span of the phase.
  explicit PhaseTrack(std::vector<double> values, double fundamental = 0.0)
      : values_(std::move(values)) {
    detail::require(values_.size() >= 2, "phase needs at least two samples");
    for (double v : values_)
      detail::require(std::isfinite(v), "phase contains a non-finite value");
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
      detail::require(values_[i + 1] > values_[i],
                      "phase is not strictly increasing at index " + std::to_string(i));
    detail::require(values_.back() - values_.front() >= 2.0,
                    "phase covers fewer than two cycles");
    fundamental_ = fundamental > 0.0 ? fundamental : extrapolated_span();
    detail::require(std::isfinite(fundamental_) && fundamental_ > 0.0,
                    "phase fundamental must be positive");
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double fundamental() const noexcept { return fundamental_; }

  /// p(t_{L-1}) - p(t_0) plus one extrapolated trailing step, i.e. p(1) - p(0).
  double extrapolated_span() const {
    const std::size_t n = values_.size();
    return values_[n - 1] - values_[0] + (values_[n - 1] - values_[n - 2]);
  }

  /// Checks 1/M <= |phi'| <= M with phi = p / fundamental, using forward
  /// differences on the uniform grid. Diagnostic only; never called implicitly.
  bool satisfies_slope_bound(double M) const {
    if (!(M >= 1.0)) return false;
    const double L = static_cast<double>(values_.size());
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      double slope = (values_[i + 1] - values_[i]) * L / fundamental_;
      if (slope < 1.0 / M || slope > M) return false;
    }
    return true;
  }

 private:
  std::vector<double> values_;
  double fundamental_ = 0.0;
};

// ---------------------------------------------------------------------------
// ShapeTable / ShapeSpectrum
// ---------------------------------------------------------------------------

/// A 2*pi-periodic shape sampled at s(2*pi*k/L_s), k = 0..L_s-1.
class ShapeTable {
 public:
  ShapeTable() = default;

  /// Validates the zero-mean invariant; see zero_mean() to project instead.
  explicit ShapeTable(std::vector<double> values) : values_(std::move(values)) {
    validate_base();
    double peak = max_abs();
    detail::require(std::abs(mean()) <= 1e-10 * peak + 1e-300,
                    "shape table is not zero-mean");
  }

  static ShapeTable zero(std::size_t size) {
    return ShapeTable(std::vector<double>(size, 0.0));
  }

  /// Removes the discrete mean before construction.
  static ShapeTable zero_mean(std::vector<double> values) {
    detail::require(!values.empty(), "shape table is empty");
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    for (double& v : values) v -= m;
    return ShapeTable(std::move(values));
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }
  bool normalized() const noexcept { return normalized_; }

  double mean() const {
    if (values_.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values_) acc += v;
    return acc / static_cast<double>(values_.size());
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Discrete analog of ||s||_{L^2([0, 2pi])}: sqrt(2pi / L_s) ||values||_2.
  double l2_norm() const {
    if (values_.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values_) acc += v * v;
    return std::sqrt(kTwoPi / static_cast<double>(values_.size()) * acc);
  }

  /// Periodic linear interpolation at x cycles, i.e. s(2*pi*x).
  double interpolate(double x) const {
    const std::size_t n = values_.size();
    double pos = wrap_unit(x) * static_cast<double>(n);
    double base = std::floor(pos);
    double frac = pos - base;
    std::size_t i = static_cast<std::size_t>(base);
    if (i >= n) i -= n;
    std::size_t j = i + 1 == n ? 0 : i + 1;
    return values_[i] + frac * (values_[j] - values_[i]);
  }

  ShapeTable scaled(double factor) const {
    ShapeTable out = *this;
    for (double& v : out.values_) v *= factor;
    out.normalized_ = false;
    return out;
  }

  friend bool operator==(const ShapeTable& a, const ShapeTable& b) {
    return a.values_ == b.values_;
  }

 private:
  friend std::pair<double, ShapeTable> normalize_shape(const ShapeTable&, double);

  void validate_base() const {
    detail::require(!values_.empty(), "shape table is empty");
    for (double v : values_)
      detail::require(std::isfinite(v), "shape table contains a non-finite value");
  }

  std::vector<double> values_;
  bool normalized_ = false;
};

/// Fourier coefficients of a shape, indexed -L_s/2 .. L_s/2 - 1.
struct ShapeSpectrum {
  std::vector<std::complex<double>> coeffs;

  std::ptrdiff_t min_index() const { return -static_cast<std::ptrdiff_t>(coeffs.size() / 2); }
  std::ptrdiff_t max_index() const {
    return min_index() + static_cast<std::ptrdiff_t>(coeffs.size()) - 1;
  }
  std::complex<double> at(std::ptrdiff_t k) const {
    return coeffs.at(static_cast<std::size_t>(k - min_index()));
  }
};

/// Splits a raw shape into (coefficient, unit-norm shape). Coefficients at or
/// below zero_threshold collapse to (0, zero table).
inline std::pair<double, ShapeTable> normalize_shape(const ShapeTable& raw,
                                                     double zero_threshold = 0.0) {
  double coefficient = raw.l2_norm();
  if (!(coefficient > zero_threshold) || coefficient == 0.0)
    return {0.0, ShapeTable::zero(raw.size())};
  ShapeTable unit = raw.scaled(1.0 / coefficient);
  unit.normalized_ = true;
  return {coefficient, std::move(unit)};
}

// ---------------------------------------------------------------------------
// MimfExpansion
// ---------------------------------------------------------------------------

enum class Parity { cos, sin };

inline const char* to_string(Parity p) { return p == Parity::cos ? "cos" : "sin"; }

/// One scale index n: a_n cos(2 pi n phi) s_cn(2 pi N phi) + b_n sin(...) s_sn(...).
struct ScaleTerm {
  double a = 0.0;
  double b = 0.0;
  ShapeTable sc;
  ShapeTable ss;

  friend bool operator==(const ScaleTerm&, const ScaleTerm&) = default;
};

class MimfExpansion {
 public:
  MimfExpansion() = default;
  MimfExpansion(double fundamental, std::size_t shape_size)
      : fundamental_(fundamental), shape_size_(shape_size) {
    detail::require(fundamental > 0.0, "expansion fundamental must be positive");
    detail::require(shape_size >= 2, "shape bandwidth must be at least 2");
  }

  double fundamental() const noexcept { return fundamental_; }
  std::size_t shape_size() const noexcept { return shape_size_; }
  const std::map<int, ScaleTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  void set(int n, ScaleTerm term) {
    detail::require(term.a >= 0.0 && term.b >= 0.0, "expansion coefficients must be nonnegative");
    detail::require(term.sc.size() == shape_size_ && term.ss.size() == shape_size_,
                    "shape table size does not match the expansion bandwidth");
    terms_[n] = std::move(term);
  }

  const ScaleTerm& at(int n) const {
    auto it = terms_.find(n);
    detail::require(it != terms_.end(), "scale index " + std::to_string(n) + " not stored");
    return it->second;
  }

  bool contains(int n) const { return terms_.count(n) != 0; }

  std::vector<int> scale_indices() const {
    std::vector<int> out;
    for (const auto& [n, _] : terms_) out.push_back(n);
    return out;
  }

  /// Largest |n| stored, or -1 when empty.
  int max_abs_index() const {
    int m = -1;
    for (const auto& [n, _] : terms_) m = std::max(m, std::abs(n));
    return m;
  }

  /// Product a_n s_cn (cos) or b_n s_sn (sin) as a table.
  ShapeTable product(int n, Parity parity) const {
    const ScaleTerm& t = at(n);
    return parity == Parity::cos ? t.sc.scaled(t.a) : t.ss.scaled(t.b);
  }

  /// Copy keeping only |n| <= band.
  MimfExpansion restricted(int band) const {
    MimfExpansion out(fundamental_, shape_size_);
    for (const auto& [n, t] : terms_)
      if (std::abs(n) <= band) out.terms_.emplace(n, t);
    return out;
  }

  /// Sum of |a_n| + |b_n| outside |n| < M0; diagnostic for the tail bound.
  double tail_mass(int M0) const {
    double acc = 0.0;
    for (const auto& [n, t] : terms_)
      if (n < -M0 || n >= M0) acc += t.a + t.b;
    return acc;
  }

  friend bool operator==(const MimfExpansion&, const MimfExpansion&) = default;

 private:
  double fundamental_ = 1.0;
  std::size_t shape_size_ = 0;
  std::map<int, ScaleTerm> terms_;
};

// ---------------------------------------------------------------------------
// Decomposition results
// ---------------------------------------------------------------------------

enum class StopReason { tolerance_met, stagnated, max_iterations };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance_met: return "tolerance_met";
    case StopReason::stagnated: return "stagnated";
    case StopReason::max_iterations: return "max_iterations";
  }
  return "unknown";
}

/// relative_residuals[0] is ||r^(0)|| / ||f|| (1, or 0 for f = 0); entry j is
/// the value after outer iteration j.
struct ConvergenceTrace {
  std::vector<double> relative_residuals;
  std::vector<double> eta;
  StopReason stop_reason = StopReason::max_iterations;
};

struct DecompositionResult {
  std::vector<MimfExpansion> expansions;
  std::vector<UniformSignal> components;
  UniformSignal residual;
  ConvergenceTrace trace;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> synthesize_terms(const MimfExpansion& expansion,
                                            const PhaseTrack& phase, std::size_t L,
                                            std::optional<int> band) {
  require(phase.size() == L, "phase length " + std::to_string(phase.size()) +
                                 " does not match signal length " + std::to_string(L));
  std::vector<double> out(L, 0.0);
  const double N = expansion.fundamental();
  for (const auto& [n, term] : expansion.terms()) {
    if (band && std::abs(n) > *band) continue;
    const bool use_c = term.a != 0.0;
    const bool use_s = term.b != 0.0 && n != 0;
    if (!use_c && !use_s) continue;
    for (std::size_t l = 0; l < L; ++l) {
      const double p = phase[l];
      const double x = wrap_unit(p);
      const double arg = kTwoPi * static_cast<double>(n) * (p / N);
      double v = 0.0;
      if (use_c) v += term.a * std::cos(arg) * term.sc.interpolate(x);
      if (use_s) v += term.b * std::sin(arg) * term.ss.interpolate(x);
      out[l] += v;
    }
  }
  return out;
}

}  // namespace detail

/// Evaluates sum_n a_n cos(2 pi n phi) s_cn(2 pi p) + b_n sin(2 pi n phi) s_sn(2 pi p)
/// on the sampling grid, with phi = p / expansion.fundamental().
inline UniformSignal synthesize_mimf(const MimfExpansion& expansion, const PhaseTrack& phase,
                                     std::size_t L) {
  return UniformSignal(detail::synthesize_terms(expansion, phase, L, std::nullopt));
}

/// M_band: synthesis restricted to |n| <= band.
inline UniformSignal banded_approximation(const MimfExpansion& expansion,
                                          const PhaseTrack& phase, int band) {
  detail::require(band >= 0, "band must be nonnegative");
  detail::require(band <= expansion.max_abs_index(),
                  "band " + std::to_string(band) + " exceeds the stored scale indices");
  return UniformSignal(detail::synthesize_terms(expansion, phase, phase.size(), band));
}

/// Pointwise f - approx (R_band when approx = M_band(f)).
inline UniformSignal residual_operator(const UniformSignal& f, const UniformSignal& approx) {
  detail::require(f.size() == approx.size(), "residual operands differ in length");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - approx[i];
  return UniformSignal(std::move(out));
}

/// Sum over components of M_band(f_k).
inline UniformSignal banded_approximation(const DecompositionResult& result,
                                          std::span<const PhaseTrack> phases, int band) {
  detail::require(phases.size() == result.expansions.size(),
                  "need one phase per decomposed component");
  detail::require(!phases.empty(), "no components to approximate");
  std::vector<double> total(phases.front().size(), 0.0);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    UniformSignal part = banded_approximation(result.expansions[k], phases[k], band);
    detail::require(part.size() == total.size(), "phase lengths differ between components");
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
  }
  return UniformSignal(std::move(total));
}

}  // namespace mmd
