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

// Residual whiteness and timing helpers.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mmd/errors.hpp"

namespace mmd {

struct WhitenessReport {
  /// rho(0..max_lag); empty when degenerate.
  std::vector<double> autocorrelation;
  double band = 0.0;
  /// Fraction of lags 1..max_lag with |rho| <= band.
  double fraction_in_band = 0.0;
  bool degenerate = false;
};

/// Normalized sample autocorrelation against the +-1.96 / sqrt(L) band.
inline WhitenessReport whiteness(std::span<const double> x, std::size_t max_lag) {
  detail::require(!x.empty(), "whiteness needs a nonempty residual");
  detail::require(max_lag >= 1 && max_lag < x.size(), "max_lag must lie in [1, L)");
  const std::size_t L = x.size();
  WhitenessReport r;
  r.band = 1.96 / std::sqrt(static_cast<double>(L));
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(L);
  std::vector<double> c(L);
  double c0 = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    c[i] = x[i] - mean;
    c0 += c[i] * c[i];
  }
  if (!(c0 > 0.0)) {
    r.degenerate = true;
    return r;
  }
  r.autocorrelation.resize(max_lag + 1);
  std::size_t inside = 0;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < L; ++i) acc += c[i] * c[i + k];
    r.autocorrelation[k] = acc / c0;
    if (k > 0 && std::abs(r.autocorrelation[k]) <= r.band) ++inside;
  }
  r.fraction_in_band = static_cast<double>(inside) / static_cast<double>(max_lag);
  return r;
}

/// Median wall time in seconds over `repetitions` calls of fn.
template <class Fn>
double median_seconds(Fn&& fn, int repetitions) {
  detail::require(repetitions >= 1, "need at least one repetition");
  std::vector<double> t;
  for (int i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(t.begin(), t.end());
  const std::size_t n = t.size();
  return n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "slope needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  detail::require(sxx > 0.0, "log-log fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace mmd
