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

// Independent reference computations and helpers shared by the tests. Every
// oracle here is a direct O(n^2)-style evaluation that shares no code path
// with the library implementation it checks.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace mmd::test {

using cplx = std::complex<double>;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> random_vector(std::mt19937_64& g, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

inline std::vector<cplx> random_complex(std::mt19937_64& g, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<cplx> v(n);
  for (cplx& x : v) x = cplx(d(g), d(g));
  return v;
}

inline double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double rel_l2(std::span<const cplx> a, std::span<const cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Centered direct sum: out[xi - xi_min] = sum_l v_l e^{-2 pi i xi u_l},
/// xi_min = -floor(out_len / 2). Accumulated in long double.
inline std::vector<cplx> direct_type1(std::span<const double> u, std::span<const cplx> v,
                                      std::size_t out_len) {
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const auto lo = -static_cast<std::ptrdiff_t>(out_len / 2);
  std::vector<cplx> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const long double xi = static_cast<long double>(lo + static_cast<std::ptrdiff_t>(i));
    long double re = 0.0L, im = 0.0L;
    for (std::size_t l = 0; l < u.size(); ++l) {
      const long double a = -two_pi * xi * static_cast<long double>(u[l]);
      const long double c = std::cos(a), s = std::sin(a);
      re += v[l].real() * c - v[l].imag() * s;
      im += v[l].real() * s + v[l].imag() * c;
    }
    out[i] = cplx(static_cast<double>(re), static_cast<double>(im));
  }
  return out;
}

/// Centered O(L^2) DFT with e^{-2 pi i xi l / L}.
inline std::vector<cplx> direct_dft(std::span<const cplx> x) {
  const std::size_t L = x.size();
  const auto lo = -static_cast<std::ptrdiff_t>(L / 2);
  std::vector<cplx> out(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto xi = lo + static_cast<std::ptrdiff_t>(i);
    long double re = 0.0L, im = 0.0L;
    for (std::size_t l = 0; l < L; ++l) {
      // Reduce the integer product first to keep the angle small.
      const auto r = ((xi * static_cast<std::ptrdiff_t>(l)) % static_cast<std::ptrdiff_t>(L) +
                      static_cast<std::ptrdiff_t>(L)) % static_cast<std::ptrdiff_t>(L);
      const long double a = -2.0L * std::numbers::pi_v<long double> * r / L;
      re += x[l].real() * std::cos(a) - x[l].imag() * std::sin(a);
      im += x[l].real() * std::sin(a) + x[l].imag() * std::cos(a);
    }
    out[i] = cplx(static_cast<double>(re), static_cast<double>(im));
  }
  return out;
}

/// Brute-force T_N: for each output index search the input for frequency N xi.
inline std::vector<cplx> gather_T(std::span<const cplx> centered, std::size_t N, bool zero_mean) {
  const std::size_t L = centered.size();
  const std::size_t M = L / N;
  const auto in_lo = -static_cast<std::ptrdiff_t>(L / 2);
  const auto out_lo = -static_cast<std::ptrdiff_t>(M / 2);
  std::vector<cplx> out(M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto xi = out_lo + static_cast<std::ptrdiff_t>(i);
    for (std::size_t j = 0; j < L; ++j)
      if (in_lo + static_cast<std::ptrdiff_t>(j) == static_cast<std::ptrdiff_t>(N) * xi)
        out[i] = centered[j];
    if (zero_mean && xi == 0) out[i] = cplx{};
  }
  return out;
}

/// Per-bin means of y over floor(x * bins); NaN for empty bins.
inline std::vector<double> bin_means(std::span<const double> x, std::span<const double> y,
                                     std::size_t bins) {
  std::vector<double> sum(bins, 0.0);
  std::vector<double> cnt(bins, 0.0);
  for (std::size_t l = 0; l < x.size(); ++l) {
    std::size_t k = 0;
    while (k + 1 < bins && x[l] >= static_cast<double>(k + 1) / static_cast<double>(bins)) ++k;
    sum[k] += y[l];
    cnt[k] += 1.0;
  }
  std::vector<double> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = cnt[k] > 0 ? sum[k] / cnt[k] : std::nan("");
  return out;
}

/// sqrt(2 pi / L_s) * ||v||_2.
inline double shape_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(2.0 * std::numbers::pi / static_cast<double>(v.size()) * s);
}

/// (1 / sqrt(L)) * ||v||_2.
inline double signal_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace mmd::test
