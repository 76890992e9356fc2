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

// Fourier machinery: a centered-index DFT on top of FFTW, the downsampling
// D_{N,L} and aliasing A_{N,L} operators, the spectral scaling operator T_N,
// and a type-1 nonuniform FFT by exponential-of-semicircle kernel gridding.
//
// Conventions: forward transforms carry no prefactor and use e^{-2 pi i xi l / L};
// the inverse carries 1/L. Spectra are stored in centered order, index 0 holding
// frequency -floor(L/2).

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/errors.hpp"

namespace mmd::spectral {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// FFT backend
// ---------------------------------------------------------------------------

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw SolverError("FFTW failed to plan size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

/// In-place unnormalized transform; sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void fft_inplace(std::vector<cplx>& data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = plan_cache().get(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

inline std::size_t positive_mod(std::ptrdiff_t a, std::size_t n) {
  auto m = static_cast<std::ptrdiff_t>(n);
  std::ptrdiff_t r = a % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Centered spectra and the uniform DFT
// ---------------------------------------------------------------------------

/// Spectrum on xi = -floor(L/2) .. L - 1 - floor(L/2), stored in that order.
struct SpectrumL {
  std::vector<cplx> coeffs;

  std::size_t size() const noexcept { return coeffs.size(); }
  std::ptrdiff_t min_index() const noexcept {
    return -static_cast<std::ptrdiff_t>(coeffs.size() / 2);
  }
  std::ptrdiff_t max_index() const noexcept {
    return min_index() + static_cast<std::ptrdiff_t>(coeffs.size()) - 1;
  }
  bool contains(std::ptrdiff_t xi) const noexcept {
    return xi >= min_index() && xi <= max_index();
  }
  cplx at(std::ptrdiff_t xi) const { return coeffs.at(static_cast<std::size_t>(xi - min_index())); }
  cplx& at(std::ptrdiff_t xi) { return coeffs.at(static_cast<std::size_t>(xi - min_index())); }

  /// Reorders to FFT order 0..L-1 (negative frequencies wrapped to the end).
  std::vector<cplx> natural_order() const {
    std::vector<cplx> out(coeffs.size());
    for (std::ptrdiff_t xi = min_index(); xi <= max_index(); ++xi)
      out[detail::positive_mod(xi, coeffs.size())] = at(xi);
    return out;
  }

  static SpectrumL from_natural_order(std::span<const cplx> natural) {
    SpectrumL s;
    s.coeffs.resize(natural.size());
    for (std::ptrdiff_t xi = s.min_index(); xi <= s.max_index(); ++xi)
      s.at(xi) = natural[detail::positive_mod(xi, natural.size())];
    return s;
  }
};

inline SpectrumL dft(std::span<const cplx> x) {
  mmd::detail::require(x.size() >= 2, "dft needs at least two samples");
  std::vector<cplx> data(x.begin(), x.end());
  detail::fft_inplace(data, FFTW_FORWARD);
  return SpectrumL::from_natural_order(data);
}

inline SpectrumL dft(std::span<const double> x) {
  std::vector<cplx> data(x.begin(), x.end());
  return dft(std::span<const cplx>(data));
}

inline std::vector<cplx> idft(const SpectrumL& spectrum) {
  mmd::detail::require(spectrum.size() >= 2, "idft needs at least two coefficients");
  std::vector<cplx> data = spectrum.natural_order();
  detail::fft_inplace(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (cplx& v : data) v *= scale;
  return data;
}

/// Fourier coefficients s_hat(k) = (1/L_s) sum_j s_j e^{-2 pi i k j / L_s}.
inline ShapeSpectrum shape_spectrum(const ShapeTable& table) {
  SpectrumL s = dft(table.values());
  ShapeSpectrum out;
  out.coeffs = std::move(s.coeffs);
  const double scale = 1.0 / static_cast<double>(table.size());
  for (cplx& c : out.coeffs) c *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// D_{N,L}, A_{N,L}, T_N
// ---------------------------------------------------------------------------

/// y[n] = x[n N], n = 0 .. L/N - 1.
template <typename T>
std::vector<T> downsample(std::span<const T> x, std::size_t N) {
  mmd::detail::require(N >= 1 && !x.empty() && x.size() % N == 0,
                  "downsampling factor must divide the length");
  std::vector<T> y(x.size() / N);
  for (std::size_t n = 0; n < y.size(); ++n) y[n] = x[n * N];
  return y;
}

/// y[n] = sum_{j=0}^{N-1} x[n + j L/N], n = 0 .. L/N - 1.
template <typename T>
std::vector<T> alias(std::span<const T> x, std::size_t N) {
  mmd::detail::require(N >= 1 && !x.empty() && x.size() % N == 0,
                  "aliasing factor must divide the length");
  const std::size_t M = x.size() / N;
  std::vector<T> y(M, T{});
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t n = 0; n < M; ++n) y[n] += x[n + j * M];
  return y;
}

/// T_N(g)(xi) = g(N xi) for xi in the centered range of length L/N. With
/// zero_mean the xi = 0 entry is forced to zero.
inline SpectrumL scale_subsample_T(const SpectrumL& g, std::size_t N, bool zero_mean = false) {
  mmd::detail::require(N >= 1 && g.size() % N == 0, "scaling factor must divide the spectrum length");
  SpectrumL out;
  out.coeffs.resize(g.size() / N);
  const auto step = static_cast<std::ptrdiff_t>(N);
  for (std::ptrdiff_t xi = out.min_index(); xi <= out.max_index(); ++xi)
    out.at(xi) = g.contains(step * xi) ? g.at(step * xi) : cplx{};
  if (zero_mean && out.contains(0)) out.at(0) = cplx{};
  return out;
}

// ---------------------------------------------------------------------------
// Type-1 NUFFT
// ---------------------------------------------------------------------------

struct NufftOptions {
  double tolerance = 1e-9;
  double oversampling = 2.0;
  /// 0 derives the width from the tolerance.
  int kernel_width = 0;
  /// Caches kernel weights per point (width * points doubles) for plans that
  /// are executed many times.
  bool precompute_kernel = false;
};

namespace detail {

/// Smallest 2^a 3^b 5^c >= n.
inline std::size_t next_smooth(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 2);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace detail

/// Kernel width needed for a target tolerance at the given oversampling.
inline int required_kernel_width(double tolerance, double oversampling) {
  double w = std::ceil(-std::log(tolerance) / (std::numbers::pi * std::sqrt(1.0 - 1.0 / oversampling)));
  return std::max(2, static_cast<int>(w) + 1);
}

/// Immutable transform plan over fixed points u_l in [0, 1). Execution
/// allocates its own scratch, so one plan may be shared between threads.
class NufftPlan {
 public:
  static constexpr double kMinTolerance = 1e-14;
  static constexpr double kMaxTolerance = 1e-4;
  static constexpr int kMaxWidth = 16;

  explicit NufftPlan(std::vector<double> points, NufftOptions options = {})
      : points_(std::move(points)), options_(options) {
    mmd::detail::require(options_.tolerance >= kMinTolerance && options_.tolerance <= kMaxTolerance,
                    "NUFFT tolerance must lie in [1e-14, 1e-4]");
    mmd::detail::require(options_.oversampling >= 2.0, "NUFFT oversampling must be at least 2");
    for (double u : points_)
      mmd::detail::require(u >= 0.0 && u < 1.0, "NUFFT points must lie in [0, 1)");
    const int needed = required_kernel_width(options_.tolerance, options_.oversampling);
    if (options_.kernel_width == 0) {
      width_ = std::min(needed, kMaxWidth);
    } else {
      mmd::detail::require(options_.kernel_width >= needed,
                      "kernel width " + std::to_string(options_.kernel_width) +
                          " cannot reach tolerance " + std::to_string(options_.tolerance) +
                          " (needs " + std::to_string(needed) + ")");
      mmd::detail::require(options_.kernel_width <= kMaxWidth, "kernel width above 16");
      width_ = options_.kernel_width;
    }
    beta_ = 0.97 * std::numbers::pi * (1.0 - 0.5 / options_.oversampling) * width_;
  }

  /// Spreading geometry depends on the fine grid size, so precomputed weights
  /// are bound to one output length.
  NufftPlan(std::vector<double> points, NufftOptions options, std::size_t out_len)
      : NufftPlan(std::move(points), options) {
    if (options_.precompute_kernel) precompute(fine_grid_size(out_len));
  }

  const std::vector<double>& points() const noexcept { return points_; }
  int kernel_width() const noexcept { return width_; }
  double tolerance() const noexcept { return options_.tolerance; }
  double oversampling() const noexcept { return options_.oversampling; }

  std::size_t fine_grid_size(std::size_t out_len) const {
    auto n = static_cast<std::size_t>(std::ceil(options_.oversampling * static_cast<double>(out_len)));
    n = std::max<std::size_t>(n, 2 * static_cast<std::size_t>(width_));
    return detail::next_smooth(n + (n % 2));
  }

  /// h(xi) ~ sum_l values[l] e^{-2 pi i xi u_l} for the centered range of out_len.
  SpectrumL execute(std::span<const cplx> values, std::size_t out_len) const {
    mmd::detail::require(values.size() == points_.size(),
                    "NUFFT values length does not match the plan's points");
    mmd::detail::require(out_len >= 1, "NUFFT output length must be positive");
    const std::size_t nf = fine_grid_size(out_len);
    std::vector<cplx> grid(nf, cplx{});
    spread(values, grid);
    detail::fft_inplace(grid, FFTW_FORWARD);

    const std::vector<double>& correction = deconvolution(out_len, nf);
    SpectrumL out;
    out.coeffs.resize(out_len);
    for (std::ptrdiff_t xi = out.min_index(); xi <= out.max_index(); ++xi)
      out.at(xi) = grid[detail::positive_mod(xi, nf)] *
                   correction[static_cast<std::size_t>(std::abs(xi))];
    return out;
  }

  SpectrumL execute(std::span<const double> values, std::size_t out_len) const {
    std::vector<cplx> c(values.begin(), values.end());
    return execute(std::span<const cplx>(c), out_len);
  }

 private:
  double kernel(double z) const {
    double s = 1.0 - z * z;
    return s <= 0.0 ? 0.0 : std::exp(beta_ * (std::sqrt(s) - 1.0));
  }

  void precompute(std::size_t nf) {
    const std::size_t w = static_cast<std::size_t>(width_);
    const double half = 0.5 * width_;
    const double inv_half = 1.0 / half;
    const double dnf = static_cast<double>(nf);
    pre_nf_ = nf;
    pre_left_.resize(points_.size());
    pre_ker_.resize(points_.size() * w);
    for (std::size_t l = 0; l < points_.size(); ++l) {
      const double g = points_[l] * dnf;
      const double left = std::ceil(g - half);
      pre_left_[l] = static_cast<std::ptrdiff_t>(left);
      for (std::size_t d = 0; d < w; ++d)
        pre_ker_[l * w + d] = kernel((left + static_cast<double>(d) - g) * inv_half);
    }
  }

  void spread(std::span<const cplx> values, std::vector<cplx>& grid) const {
    const std::size_t nf = grid.size();
    if (nf == pre_nf_) {
      spread_precomputed(values, grid);
      return;
    }
    const double half = 0.5 * width_;
    const double inv_half = 1.0 / half;
    const double dnf = static_cast<double>(nf);
    std::vector<double> ker(static_cast<std::size_t>(width_));
    for (std::size_t l = 0; l < points_.size(); ++l) {
      const cplx v = values[l];
      if (v == cplx{}) continue;
      const double g = points_[l] * dnf;
      const double left = std::ceil(g - half);
      for (int d = 0; d < width_; ++d)
        ker[static_cast<std::size_t>(d)] = kernel((left + static_cast<double>(d) - g) * inv_half);
      auto i0 = static_cast<std::ptrdiff_t>(left);
      if (i0 >= 0 && i0 + width_ <= static_cast<std::ptrdiff_t>(nf)) {
        cplx* dst = grid.data() + i0;
        for (int d = 0; d < width_; ++d) dst[d] += v * ker[static_cast<std::size_t>(d)];
      } else {
        for (int d = 0; d < width_; ++d)
          grid[detail::positive_mod(i0 + d, nf)] += v * ker[static_cast<std::size_t>(d)];
      }
    }
  }

  void spread_precomputed(std::span<const cplx> values, std::vector<cplx>& grid) const {
    const std::size_t nf = grid.size();
    const std::size_t w = static_cast<std::size_t>(width_);
    for (std::size_t l = 0; l < points_.size(); ++l) {
      const cplx v = values[l];
      if (v == cplx{}) continue;
      const double* ker = pre_ker_.data() + l * w;
      const std::ptrdiff_t i0 = pre_left_[l];
      if (i0 >= 0 && i0 + width_ <= static_cast<std::ptrdiff_t>(nf)) {
        cplx* dst = grid.data() + i0;
        for (std::size_t d = 0; d < w; ++d) dst[d] += v * ker[d];
      } else {
        for (std::size_t d = 0; d < w; ++d)
          grid[detail::positive_mod(i0 + static_cast<std::ptrdiff_t>(d), nf)] += v * ker[d];
      }
    }
  }

  // 1 / psi_hat(|xi|) for xi up to out_len/2 + 1. The factors depend only on
  // the kernel and grid sizes, so they are shared process-wide.
  const std::vector<double>& deconvolution(std::size_t out_len, std::size_t nf) const {
    static std::mutex mutex;
    static std::map<std::tuple<int, double, std::size_t, std::size_t>, std::vector<double>> cache;
    const auto key = std::make_tuple(width_, beta_, nf, out_len);
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const std::size_t q = std::max<std::size_t>(64, 4 * static_cast<std::size_t>(width_));
    auto [nodes, weights] = detail::gauss_legendre(q);
    std::vector<double> phi(q);
    for (std::size_t i = 0; i < q; ++i) phi[i] = kernel(nodes[i]);
    const std::size_t kmax = out_len / 2 + 1;
    std::vector<double> factors(kmax + 1);
    const double half = 0.5 * width_;
    for (std::size_t k = 0; k <= kmax; ++k) {
      const double omega = std::numbers::pi * static_cast<double>(k) * width_ / static_cast<double>(nf);
      double acc = 0.0;
      for (std::size_t i = 0; i < q; ++i) acc += weights[i] * phi[i] * std::cos(omega * nodes[i]);
      factors[k] = 1.0 / (half * acc);
    }
    return cache.emplace(key, std::move(factors)).first->second;
  }

  std::vector<double> points_;
  NufftOptions options_;
  int width_ = 0;
  double beta_ = 0.0;
  std::size_t pre_nf_ = 0;
  std::vector<std::ptrdiff_t> pre_left_;
  std::vector<double> pre_ker_;
};

/// Type-1 NUFFT: h(xi) ~ sum_l values[l] e^{-2 pi i xi u_l}, relative l2
/// accuracy plan.tolerance() against direct summation.
inline SpectrumL nufft_type1(const NufftPlan& plan, std::span<const cplx> values,
                             std::size_t out_len) {
  return plan.execute(values, out_len);
}

}  // namespace mmd::spectral
