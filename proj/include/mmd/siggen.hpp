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

// Synthetic inputs: shape libraries, the two-component test signals and
// seeded noise. Every generator returns its ground truth.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/errors.hpp"
#include "mmd/spectral.hpp"

namespace mmd {

enum class ShapeKind { piecewise_linear, ecg_like, harmonic };

inline const char* to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::piecewise_linear: return "piecewise_linear";
    case ShapeKind::ecg_like: return "ecg_like";
    case ShapeKind::harmonic: return "harmonic";
  }
  return "unknown";
}

/// Knot of a periodic piecewise-linear profile; x in cycles.
struct Knot {
  double x = 0.0;
  double y = 0.0;
};

/// Periodized Gaussian lobe; center and width in cycles.
struct Peak {
  double center = 0.0;
  double height = 0.0;
  double width = 0.0;
};

struct Harmonic {
  int n = 1;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

struct ShapeSpec {
  ShapeKind kind = ShapeKind::harmonic;
  std::vector<Knot> knots;
  std::vector<Peak> peaks;
  std::vector<Harmonic> harmonics;
  std::uint64_t seed = 0;

  static ShapeSpec piecewise_linear(std::vector<Knot> knots) {
    ShapeSpec s;
    s.kind = ShapeKind::piecewise_linear;
    s.knots = std::move(knots);
    return s;
  }
  static ShapeSpec ecg_like(std::vector<Peak> peaks) {
    ShapeSpec s;
    s.kind = ShapeKind::ecg_like;
    s.peaks = std::move(peaks);
    return s;
  }
  static ShapeSpec harmonic(std::vector<Harmonic> terms) {
    ShapeSpec s;
    s.kind = ShapeKind::harmonic;
    s.harmonics = std::move(terms);
    return s;
  }

  /// Harmonics 1..max_n with Gaussian coefficients scaled by 1/n^2.
  static ShapeSpec random_harmonic(std::uint64_t seed, int max_n) {
    detail::require(max_n >= 1, "random harmonic shape needs max_n >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    ShapeSpec s;
    s.kind = ShapeKind::harmonic;
    s.seed = seed;
    for (int n = 1; n <= max_n; ++n) {
      const double damp = 1.0 / (static_cast<double>(n) * n);
      s.harmonics.push_back({n, damp * g(rng), damp * g(rng)});
    }
    return s;
  }

  friend bool operator==(const ShapeSpec& a, const ShapeSpec& b) {
    auto key = [](const ShapeSpec& s) {
      std::ostringstream o;
      o.precision(17);
      o << static_cast<int>(s.kind) << '|' << s.seed;
      for (const auto& k : s.knots) o << '|' << k.x << ',' << k.y;
      for (const auto& p : s.peaks) o << '|' << p.center << ',' << p.height << ',' << p.width;
      for (const auto& h : s.harmonics) o << '|' << h.n << ',' << h.cos_coef << ',' << h.sin_coef;
      return o.str();
    };
    return key(a) == key(b);
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " value '" + s + "'");
  }
}

inline std::string fmt17(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

}  // namespace detail

/// Serializes into key=value pairs under the given prefix.
inline std::map<std::string, std::string> to_config(const ShapeSpec& s,
                                                    const std::string& prefix = "shape") {
  std::map<std::string, std::string> kv;
  kv[prefix + ".kind"] = to_string(s.kind);
  kv[prefix + ".seed"] = std::to_string(s.seed);
  std::string list;
  auto sep = [&] { if (!list.empty()) list += ','; };
  switch (s.kind) {
    case ShapeKind::piecewise_linear:
      for (const auto& k : s.knots) { sep(); list += detail::fmt17(k.x) + ':' + detail::fmt17(k.y); }
      kv[prefix + ".knots"] = list;
      break;
    case ShapeKind::ecg_like:
      for (const auto& p : s.peaks) {
        sep();
        list += detail::fmt17(p.center) + ':' + detail::fmt17(p.height) + ':' + detail::fmt17(p.width);
      }
      kv[prefix + ".peaks"] = list;
      break;
    case ShapeKind::harmonic:
      for (const auto& h : s.harmonics) {
        sep();
        list += std::to_string(h.n) + ':' + detail::fmt17(h.cos_coef) + ':' + detail::fmt17(h.sin_coef);
      }
      kv[prefix + ".harmonics"] = list;
      break;
  }
  return kv;
}

inline ShapeSpec shape_spec_from_config(const std::map<std::string, std::string>& kv,
                                        const std::string& prefix = "shape") {
  auto get = [&](const std::string& key) -> std::string {
    auto it = kv.find(prefix + "." + key);
    if (it == kv.end()) throw ParseError("missing key " + prefix + "." + key);
    return it->second;
  };
  auto fields = [&](const std::string& item, std::size_t n) {
    auto parts = detail::split(item, ':');
    if (parts.size() != n) throw ParseError("malformed shape entry '" + item + "'");
    return parts;
  };
  ShapeSpec s;
  const std::string kind = get("kind");
  if (auto it = kv.find(prefix + ".seed"); it != kv.end()) {
    try {
      s.seed = std::stoull(it->second);
    } catch (const std::exception&) {
      throw ParseError("cannot parse shape seed '" + it->second + "'");
    }
  }
  if (kind == "piecewise_linear") {
    s.kind = ShapeKind::piecewise_linear;
    for (const auto& item : detail::split(get("knots"), ',')) {
      auto f = fields(item, 2);
      s.knots.push_back({detail::parse_double(f[0], "knot"), detail::parse_double(f[1], "knot")});
    }
  } else if (kind == "ecg_like") {
    s.kind = ShapeKind::ecg_like;
    for (const auto& item : detail::split(get("peaks"), ',')) {
      auto f = fields(item, 3);
      s.peaks.push_back({detail::parse_double(f[0], "peak"), detail::parse_double(f[1], "peak"),
                         detail::parse_double(f[2], "peak")});
    }
  } else if (kind == "harmonic") {
    s.kind = ShapeKind::harmonic;
    for (const auto& item : detail::split(get("harmonics"), ',')) {
      auto f = fields(item, 3);
      s.harmonics.push_back({static_cast<int>(detail::parse_double(f[0], "harmonic index")),
                             detail::parse_double(f[1], "harmonic"),
                             detail::parse_double(f[2], "harmonic")});
    }
  } else {
    throw ParseError("unknown shape kind '" + kind + "'");
  }
  return s;
}

/// Continuous zero-mean, unit-L2 profile on one cycle: value(x) = scale (raw(x) - mean).
class ShapeFunction {
 public:
  explicit ShapeFunction(ShapeSpec spec) : spec_(std::move(spec)) {
    validate();
    double mean = 0.0, second = 0.0;
    if (spec_.kind == ShapeKind::piecewise_linear) {
      // Exact integrals of a periodic piecewise-linear function.
      const auto& k = spec_.knots;
      for (std::size_t i = 0; i < k.size(); ++i) {
        const Knot& a = k[i];
        const Knot& b = k[(i + 1) % k.size()];
        const double dx = i + 1 < k.size() ? b.x - a.x : b.x + 1.0 - a.x;
        mean += dx * (a.y + b.y) / 2.0;
        second += dx * (a.y * a.y + a.y * b.y + b.y * b.y) / 3.0;
      }
    } else {
      // Trapezoid rule is spectrally accurate for smooth periodic integrands.
      constexpr std::size_t kNodes = 1 << 16;
      for (std::size_t i = 0; i < kNodes; ++i) {
        const double v = raw(static_cast<double>(i) / kNodes);
        mean += v;
        second += v * v;
      }
      mean /= kNodes;
      second /= kNodes;
    }
    const double variance = second - mean * mean;
    if (!(variance > 1e-24 * std::max(1.0, second)))
      throw ValidationError("degenerate shape spec: profile is constant");
    mean_ = mean;
    // 2 pi * integral over one cycle of value^2 equals 1.
    scale_ = 1.0 / std::sqrt(kTwoPi * variance);
  }

  const ShapeSpec& spec() const noexcept { return spec_; }
  double operator()(double x) const { return scale_ * (raw(x) - mean_); }

 private:
  void validate() const {
    switch (spec_.kind) {
      case ShapeKind::piecewise_linear: {
        detail::require(spec_.knots.size() >= 2, "piecewise-linear shape needs two knots");
        for (std::size_t i = 0; i < spec_.knots.size(); ++i) {
          const Knot& k = spec_.knots[i];
          detail::require(std::isfinite(k.y) && k.x >= 0.0 && k.x < 1.0,
                          "knot abscissae must lie in [0, 1)");
          if (i > 0)
            detail::require(k.x > spec_.knots[i - 1].x, "knot abscissae must increase");
        }
        break;
      }
      case ShapeKind::ecg_like:
        detail::require(!spec_.peaks.empty(), "ecg-like shape needs at least one peak");
        for (const auto& p : spec_.peaks)
          detail::require(p.width > 0.0 && p.width < 0.5 && std::isfinite(p.height) &&
                              std::isfinite(p.center),
                          "ecg-like peak widths must lie in (0, 0.5)");
        break;
      case ShapeKind::harmonic:
        detail::require(!spec_.harmonics.empty(), "harmonic shape needs at least one term");
        for (const auto& h : spec_.harmonics)
          detail::require(h.n != 0 && std::isfinite(h.cos_coef) && std::isfinite(h.sin_coef),
                          "harmonic indices must be nonzero");
        break;
    }
  }

  double raw(double x) const {
    x = wrap_unit(x);
    switch (spec_.kind) {
      case ShapeKind::piecewise_linear: {
        const auto& k = spec_.knots;
        std::size_t i = 0;
        while (i + 1 < k.size() && k[i + 1].x <= x) ++i;
        if (x < k.front().x) i = k.size() - 1;
        const Knot& a = k[i];
        const Knot& b = k[(i + 1) % k.size()];
        double span = b.x - a.x, d = x - a.x;
        if (i + 1 == k.size()) span += 1.0;
        if (d < 0.0) d += 1.0;
        return a.y + (b.y - a.y) * (d / span);
      }
      case ShapeKind::ecg_like: {
        double v = 0.0;
        for (const auto& p : spec_.peaks) {
          double d = x - p.center;
          d -= std::round(d);
          for (int w = -1; w <= 1; ++w) {
            const double z = (d + w) / p.width;
            v += p.height * std::exp(-0.5 * z * z);
          }
        }
        return v;
      }
      case ShapeKind::harmonic: {
        double v = 0.0;
        for (const auto& h : spec_.harmonics) {
          const double a = kTwoPi * h.n * x;
          v += h.cos_coef * std::cos(a) + h.sin_coef * std::sin(a);
        }
        return v;
      }
    }
    return 0.0;
  }

  ShapeSpec spec_;
  double mean_ = 0.0;
  double scale_ = 1.0;
};

/// gcd of the indices of harmonics above rel_tol times the largest one.
inline long shape_gcd(const ShapeTable& table, double rel_tol = 1e-8) {
  const spectral::SpectrumL s = spectral::dft(table.values());
  double peak = 0.0;
  for (const auto& c : s.coeffs) peak = std::max(peak, std::abs(c));
  long g = 0;
  for (std::ptrdiff_t k = 1; k <= s.max_index(); ++k)
    if (std::abs(s.at(k)) > rel_tol * peak) g = std::gcd(g, static_cast<long>(k));
  return g;
}

/// Samples the profile on L_s points, then enforces exact discrete zero mean
/// and unit norm. Rejects constant profiles and gcd(s) != 1.
inline ShapeTable gen_shape(const ShapeSpec& spec, std::size_t shape_size) {
  detail::require(shape_size >= 4, "shape bandwidth must be at least 4");
  const ShapeFunction fn(spec);
  std::vector<double> v(shape_size);
  for (std::size_t j = 0; j < shape_size; ++j)
    v[j] = fn(static_cast<double>(j) / static_cast<double>(shape_size));
  auto [coef, unit] = normalize_shape(ShapeTable::zero_mean(std::move(v)));
  if (coef == 0.0) throw ValidationError("degenerate shape spec: sampled profile is zero");
  const long g = shape_gcd(unit);
  detail::require(g == 1, "shape harmonics share the common divisor " + std::to_string(g) +
                              "; the fundamental would be misidentified");
  return unit;
}

/// Canonical asymmetric spike profiles for the two-component test signal.
inline ShapeSpec ex2_shape1() {
  return ShapeSpec::piecewise_linear(
      {{0.0, 0.0}, {0.30, 0.15}, {0.42, 1.0}, {0.50, -0.55}, {0.58, 0.05}, {0.80, 0.0}});
}

inline ShapeSpec ex2_shape2() {
  return ShapeSpec::piecewise_linear(
      {{0.0, 0.0}, {0.20, -0.2}, {0.35, 0.6}, {0.45, -1.0}, {0.62, 0.3}, {0.85, 0.0}});
}

/// Q, R and S lobes.
inline ShapeSpec ecg_shape1() {
  return ShapeSpec::ecg_like({{0.44, -0.18, 0.020}, {0.50, 1.0, 0.018}, {0.57, -0.30, 0.022}});
}

inline ShapeSpec ecg_shape2() {
  return ShapeSpec::ecg_like({{0.40, -0.25, 0.022}, {0.48, 1.0, 0.020}, {0.55, -0.20, 0.025}});
}

struct SyntheticSignal {
  UniformSignal signal;
  std::vector<PhaseTrack> phases;
  std::vector<UniformSignal> components;
  std::vector<MimfExpansion> expansions;
};

namespace detail {

inline double grid_time(std::size_t l, std::size_t L) {
  return static_cast<double>(l) / static_cast<double>(L);
}

}  // namespace detail

/// f1 = s1(2 pi N (t + 0.006 sin 2 pi t)), f2 = s2(2 pi N (t + 0.006 cos 2 pi t)).
inline SyntheticSignal gen_ex2(double N, std::size_t L, const ShapeSpec& s1 = ex2_shape1(),
                               const ShapeSpec& s2 = ex2_shape2(),
                               std::size_t shape_size = 1000) {
  detail::require(N >= 2.0, "ex2 needs N >= 2");
  detail::require(L >= UniformSignal::kMinLength, "ex2 needs L >= 16");
  const ShapeFunction f1(s1), f2(s2);
  std::vector<double> p1(L), p2(L), c1(L), c2(L), sum(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double t = detail::grid_time(l, L);
    p1[l] = N * (t + 0.006 * std::sin(kTwoPi * t));
    p2[l] = N * (t + 0.006 * std::cos(kTwoPi * t));
    c1[l] = f1(p1[l]);
    c2[l] = f2(p2[l]);
    sum[l] = c1[l] + c2[l];
  }
  SyntheticSignal out;
  out.signal = UniformSignal(std::move(sum));
  out.phases.emplace_back(std::move(p1), N);
  out.phases.emplace_back(std::move(p2), N);
  out.components.emplace_back(std::move(c1));
  out.components.emplace_back(std::move(c2));
  for (const ShapeSpec* spec : {&s1, &s2}) {
    MimfExpansion e(N, shape_size);
    ShapeTable unit = gen_shape(*spec, shape_size);
    e.set(0, ScaleTerm{1.0, 0.0, unit, ShapeTable::zero(shape_size)});
    out.expansions.push_back(std::move(e));
  }
  return out;
}

/// f_k = alpha_k(phi_k) s_k(2 pi N_k phi_k), N = (150, 220),
/// alpha_1 = 1 + 0.2 cos + 0.1 sin, alpha_2 = 1 + 0.1 cos + 0.2 sin,
/// phi_1 = t + 0.006 sin 2 pi t, phi_2 = t + 0.006 cos 2 pi t.
/// Ground truth splits each modulation evenly between +-1.
inline SyntheticSignal gen_ex3(std::size_t L, const ShapeSpec& s1 = ecg_shape1(),
                               const ShapeSpec& s2 = ecg_shape2(),
                               std::size_t shape_size = 1000) {
  detail::require(L >= (std::size_t{1} << 14), "ex3 needs L >= 2^14");
  struct Part {
    double N, ca, sa;
    bool sine_warp;
    const ShapeSpec* spec;
  };
  const Part parts[2] = {{150.0, 0.2, 0.1, true, &s1}, {220.0, 0.1, 0.2, false, &s2}};
  SyntheticSignal out;
  std::vector<double> sum(L, 0.0);
  for (const Part& part : parts) {
    const ShapeFunction fn(*part.spec);
    std::vector<double> p(L), c(L);
    for (std::size_t l = 0; l < L; ++l) {
      const double t = detail::grid_time(l, L);
      const double phi =
          t + 0.006 * (part.sine_warp ? std::sin(kTwoPi * t) : std::cos(kTwoPi * t));
      const double alpha =
          1.0 + part.ca * std::cos(kTwoPi * phi) + part.sa * std::sin(kTwoPi * phi);
      p[l] = part.N * phi;
      c[l] = alpha * fn(p[l]);
      sum[l] += c[l];
    }
    out.phases.emplace_back(std::move(p), part.N);
    out.components.emplace_back(std::move(c));

    const ShapeTable unit = gen_shape(*part.spec, shape_size);
    const ShapeTable zero = ShapeTable::zero(shape_size);
    const ShapeTable neg = unit.scaled(-1.0);
    MimfExpansion e(part.N, shape_size);
    e.set(0, ScaleTerm{1.0, 0.0, unit, zero});
    e.set(1, ScaleTerm{part.ca / 2.0, part.sa / 2.0, unit, unit});
    e.set(-1, ScaleTerm{part.ca / 2.0, part.sa / 2.0, unit, neg});
    out.expansions.push_back(std::move(e));
  }
  out.signal = UniformSignal(std::move(sum));
  return out;
}

/// f + sigma * N(0, 1) draws from mt19937_64(seed).
inline UniformSignal add_noise(const UniformSignal& f, double sigma, std::uint64_t seed) {
  detail::require(sigma >= 0.0 && std::isfinite(sigma), "noise sigma must be nonnegative");
  if (sigma == 0.0) return f;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(f.samples().begin(), f.samples().end());
  for (double& x : v) x += g(rng);
  return UniformSignal(std::move(v));
}

}  // namespace mmd
