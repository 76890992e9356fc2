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

// Diffeomorphism-based spectral analysis of a single MIMF.
//
// For a scale index n the modulated signal c_l = trig(2 pi n phi(t_l)) f(t_l)
// is transformed on the warped grid and only the frequencies N k survive the
// subsampling T_N. Because e^{-2 pi i (N k) phi} = e^{-2 pi i k p} with p = N phi,
// this is a type-1 NUFFT at the integer frequencies k on the folded points
// frac(p(t_l)); no length N * L_s spectrum is ever formed.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/errors.hpp"
#include "mmd/parallel.hpp"
#include "mmd/spectral.hpp"

namespace mmd {

/// Integer nearest to p(1) - p(0), with the trailing step extrapolated.
inline int effective_fundamental(const PhaseTrack& phase) {
  const double span = phase.extrapolated_span();
  const long rounded = std::lround(span);
  detail::require(rounded >= 2, "effective fundamental below 2 (phase span " +
                                    std::to_string(span) + ")");
  return static_cast<int>(rounded);
}

struct DsaSettings {
  /// N in phi = p / N; 0 uses effective_fundamental(phase).
  double fundamental = 0.0;
  /// L_s, even.
  std::size_t shape_size = 1000;
  double nufft_tolerance = 1e-9;
  /// Zero Fourier bins |k| >= L / (2N) that the sampling grid cannot resolve.
  bool limit_to_resolvable_band = true;
  /// 0 follows MMD_THREADS / hardware concurrency.
  std::size_t threads = 0;
};

struct DsaRequest {
  const UniformSignal& signal;
  const PhaseTrack& phase;
  std::vector<int> scale_set;
  DsaSettings settings;
};

struct DsaOutput {
  std::map<int, double> a;
  std::map<int, double> b;
  std::map<int, ShapeTable> s_c;
  std::map<int, ShapeTable> s_s;
  /// Unnormalized products a_n s_cn and b_n s_sn, exactly as extracted.
  std::map<int, ShapeTable> raw_c;
  std::map<int, ShapeTable> raw_s;
  UniformSignal f_c;
  UniformSignal f_s;
};

/// 2 when only one of +-n is requested, 1 when both share the modulation
/// (cos(2 pi n phi) = cos(-2 pi n phi), so each takes half).
inline double modulation_factor(int n, std::span<const int> scale_set) {
  if (n == 0) return 1.0;
  return std::find(scale_set.begin(), scale_set.end(), -n) != scale_set.end() ? 1.0 : 2.0;
}

/// Geometry shared by every extraction against one phase: folded points,
/// quadrature weights and the NUFFT plan. Immutable and thread-safe.
class DsaPlan {
 public:
  DsaPlan(const PhaseTrack& phase, DsaSettings settings, bool reuse = true)
      : phase_(phase), settings_(settings) {
    detail::require(settings_.shape_size >= 2 && settings_.shape_size % 2 == 0,
                    "shape bandwidth L_s must be even and at least 2");
    n_eff_ = effective_fundamental(phase);
    fundamental_ = settings_.fundamental > 0.0 ? settings_.fundamental : static_cast<double>(n_eff_);

    const std::size_t L = phase.size();
    std::vector<double> folded(L);
    phi_.resize(L);
    weights_.resize(L);
    const double span = phase.extrapolated_span();
    for (std::size_t l = 0; l < L; ++l) {
      folded[l] = wrap_unit(phase[l]);
      phi_[l] = phase[l] / fundamental_;
      const double step = l + 1 < L ? phase[l + 1] - phase[l] : phase[L - 1] - phase[L - 2];
      weights_[l] = step / span;
    }
    spectral::NufftOptions opts;
    opts.tolerance = settings_.nufft_tolerance;
    opts.precompute_kernel = reuse;
    plan_.emplace(std::move(folded), opts, settings_.shape_size + 2);

    const auto half = static_cast<std::ptrdiff_t>(settings_.shape_size / 2);
    k_lo_ = -half;
    k_hi_ = half - 1;
    if (settings_.limit_to_resolvable_band) {
      const auto B = static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(L) / fundamental_));
      // keep -B/2 <= k < B/2
      k_lo_ = std::max(k_lo_, -(B / 2));
      k_hi_ = std::min(k_hi_, (B + 1) / 2 - 1);
    }
  }

  const PhaseTrack& phase() const noexcept { return phase_; }
  const DsaSettings& settings() const noexcept { return settings_; }
  int effective_n() const noexcept { return n_eff_; }
  double fundamental() const noexcept { return fundamental_; }
  std::size_t shape_size() const noexcept { return settings_.shape_size; }
  const spectral::NufftPlan& nufft() const { return *plan_; }

  void check_index(int n) const {
    detail::require(2 * std::abs(n) < n_eff_,
                    "scale index " + std::to_string(n) + " violates |n| < N_eff/2 (N_eff = " +
                        std::to_string(n_eff_) + ")");
  }

  /// Raw product a_n s_cn (or b_n s_sn) for one scale index and parity,
  /// before normalization. factor is 2^{|sgn n|} or 1 for symmetric sets.
  ShapeTable extract_raw(const UniformSignal& signal, int n, Parity parity, double factor) const {
    check_signal(signal);
    check_index(n);
    const std::size_t L = signal.size();
    if (parity == Parity::sin && n == 0) return ShapeTable::zero(shape_size());
    std::vector<double> c(L);
    for (std::size_t l = 0; l < L; ++l) {
      const double arg = kTwoPi * static_cast<double>(n) * phi_[l];
      const double m = n == 0 ? 1.0 : (parity == Parity::cos ? std::cos(arg) : std::sin(arg));
      c[l] = weights_[l] * m * signal[l];
    }
    spectral::SpectrumL h = plan_->execute(std::span<const double>(c), shape_size() + 2);
    return to_table(h, factor, false);
  }

  /// Both parities with one complex transform: c_l = w_l f_l e^{2 pi i n phi}.
  std::pair<ShapeTable, ShapeTable> extract_raw_pair(const UniformSignal& signal, int n,
                                                     double factor) const {
    check_signal(signal);
    check_index(n);
    const std::size_t L = signal.size();
    if (n == 0) return {extract_raw(signal, 0, Parity::cos, factor), ShapeTable::zero(shape_size())};
    std::vector<spectral::cplx> c(L);
    for (std::size_t l = 0; l < L; ++l) {
      const double arg = kTwoPi * static_cast<double>(n) * phi_[l];
      c[l] = weights_[l] * signal[l] * spectral::cplx(std::cos(arg), std::sin(arg));
    }
    spectral::SpectrumL h = plan_->execute(std::span<const spectral::cplx>(c), shape_size() + 2);
    return {to_table(h, factor, false), to_table(h, factor, true)};
  }

  DsaOutput run(const UniformSignal& signal, std::span<const int> scale_set) const {
    check_signal(signal);
    std::vector<int> indices(scale_set.begin(), scale_set.end());
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (int n : indices) check_index(n);

    const double threshold = 1e-8 * signal.norm();
    std::vector<std::pair<ShapeTable, ShapeTable>> raw(indices.size());
    parallel_for(
        indices.size(),
        [&](std::size_t i) {
          raw[i] = extract_raw_pair(signal, indices[i], modulation_factor(indices[i], indices));
        },
        settings_.threads);

    DsaOutput out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const int n = indices[i];
      auto [ac, uc] = normalize_shape(raw[i].first, threshold);
      auto [bs, us] = normalize_shape(raw[i].second, threshold);
      out.a[n] = ac;
      out.b[n] = bs;
      out.s_c.emplace(n, std::move(uc));
      out.s_s.emplace(n, std::move(us));
      // A coefficient under the threshold contributes nothing downstream.
      out.raw_c.emplace(n, ac == 0.0 ? ShapeTable::zero(shape_size()) : std::move(raw[i].first));
      out.raw_s.emplace(n, bs == 0.0 ? ShapeTable::zero(shape_size()) : std::move(raw[i].second));
    }
    out.f_c = UniformSignal(partial_sum(indices, out.a, out.s_c, Parity::cos));
    out.f_s = UniformSignal(partial_sum(indices, out.b, out.s_s, Parity::sin));
    return out;
  }

 private:
  void check_signal(const UniformSignal& signal) const {
    detail::require(signal.size() == phase_.size(),
                    "signal length " + std::to_string(signal.size()) +
                        " does not match phase length " + std::to_string(phase_.size()));
  }

  // h spans k = -L_s/2 - 1 .. L_s/2. The cos part of a complex input is
  // (h(k) + conj h(-k)) / 2 and the sin part (h(k) - conj h(-k)) / 2i; a real
  // input passes through unchanged.
  ShapeTable to_table(const spectral::SpectrumL& h, double factor, bool sin_part) const {
    const std::size_t Ls = shape_size();
    spectral::SpectrumL s;
    s.coeffs.assign(Ls, spectral::cplx{});
    for (std::ptrdiff_t k = k_lo_; k <= k_hi_; ++k) {
      if (k == 0) continue;
      const spectral::cplx v = sin_part
                                   ? (h.at(k) - std::conj(h.at(-k))) / spectral::cplx(0.0, 2.0)
                                   : 0.5 * (h.at(k) + std::conj(h.at(-k)));
      s.at(k) = v;
    }
    std::vector<spectral::cplx> x = spectral::idft(s);
    std::vector<double> values(Ls);
    const double scale = factor * static_cast<double>(Ls);
    for (std::size_t j = 0; j < Ls; ++j) values[j] = scale * x[j].real();
    return ShapeTable::zero_mean(std::move(values));
  }

  std::vector<double> partial_sum(const std::vector<int>& indices,
                                  const std::map<int, double>& coef,
                                  const std::map<int, ShapeTable>& shapes, Parity parity) const {
    const std::size_t L = phase_.size();
    std::vector<double> out(L, 0.0);
    for (int n : indices) {
      const double a = coef.at(n);
      if (a == 0.0) continue;
      const ShapeTable& table = shapes.at(n);
      for (std::size_t l = 0; l < L; ++l) {
        const double arg = kTwoPi * static_cast<double>(n) * phi_[l];
        const double m = parity == Parity::cos ? std::cos(arg) : std::sin(arg);
        out[l] += a * m * table.interpolate(phase_[l]);
      }
    }
    return out;
  }

  PhaseTrack phase_;
  DsaSettings settings_;
  int n_eff_ = 0;
  double fundamental_ = 1.0;
  std::vector<double> phi_;
  std::vector<double> weights_;
  std::optional<spectral::NufftPlan> plan_;
  std::ptrdiff_t k_lo_ = 0;
  std::ptrdiff_t k_hi_ = 0;
};

/// One coefficient and unit shape for scale index n and the given parity.
inline std::pair<double, ShapeTable> extract_single(const DsaRequest& req, int n, Parity parity) {
  detail::require(req.signal.size() == req.phase.size(), "signal and phase lengths differ");
  DsaPlan plan(req.phase, req.settings, false);
  ShapeTable raw = plan.extract_raw(req.signal, n, parity, modulation_factor(n, req.scale_set));
  return normalize_shape(raw, 1e-8 * req.signal.norm());
}

/// Extraction over the whole scale set plus the partial sums f_c and f_s.
inline DsaOutput run_dsa(const DsaRequest& req) {
  detail::require(req.signal.size() == req.phase.size(), "signal and phase lengths differ");
  DsaPlan plan(req.phase, req.settings, req.scale_set.size() > 1);
  return plan.run(req.signal, req.scale_set);
}

}  // namespace mmd
