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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "mmd/dsa.hpp"
#include "mmd/rdbr_oracle.hpp"
#include "mmd/siggen.hpp"
#include "oracles.hpp"

using namespace mmd;
using Catch::Matchers::WithinAbs;

namespace {

double lipschitz(const ShapeFunction& s) {
  constexpr int kSteps = 1 << 16;
  double best = 0.0;
  for (int i = 0; i < kSteps; ++i) {
    const double x = static_cast<double>(i) / kSteps;
    best = std::max(best, std::abs(s(x + 1.0 / kSteps) - s(x)) * kSteps);
  }
  return best;
}

}  // namespace

TEST_CASE("folding maps phases into the unit interval") {
  PhaseTrack p({0.2, 1.2, 2.2});
  const std::vector<double> y{1.0, 2.0, 3.0};
  FoldedSamples s = fold(p, y, 4);
  for (double x : s.x) CHECK_THAT(x, WithinAbs(0.2, 1e-15));
  CHECK(s.y == y);
  CHECK(s.h() == 0.25);

  FoldedSamples ints = fold(PhaseTrack({0.0, 1.0, 2.0, 3.0}), std::vector<double>(4, 0.0));
  for (double x : ints.x) CHECK(x == 0.0);

  FoldedSamples neg = fold(PhaseTrack({-0.25, 0.75, 1.75}), std::vector<double>(3, 0.0));
  CHECK(neg.x[0] == 0.75);

  CHECK_THROWS_AS(fold(p, std::vector<double>(2, 0.0)), ValidationError);
}

TEST_CASE("partition regression of constant and linear responses") {
  FoldedSamples c;
  c.bins = 8;
  for (int i = 0; i < 64; ++i) {
    c.x.push_back(i / 64.0);
    c.y.push_back(3.0);
  }
  PartitionEstimate e = partition_regress(c);
  for (double v : e.values) CHECK(v == 3.0);

  FoldedSamples lin;
  lin.bins = 4;
  for (int i = 0; i < 4096; ++i) {
    lin.x.push_back(i / 4096.0);
    lin.y.push_back(i / 4096.0);
  }
  PartitionEstimate le = partition_regress(lin);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(std::abs(le.values[k] - (k + 0.5) * 0.25) <= 0.125);
}

TEST_CASE("empty bins are filled periodically and flagged") {
  FoldedSamples s;
  s.bins = 4;
  s.x = {0.1, 0.6};
  s.y = {0.0, 2.0};
  PartitionEstimate e = partition_regress(s);
  CHECK(e.occupied == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(e.values[1] == 1.0);
  CHECK(e.values[3] == 1.0);
  CHECK(e.evaluate(1.1) == 0.0);

  FoldedSamples none;
  none.bins = 4;
  CHECK_THROWS_AS(partition_regress(none), ValidationError);
  FoldedSamples one;
  one.bins = 1;
  one.x = {0.5};
  one.y = {1.0};
  CHECK_THROWS_AS(partition_regress(one), ValidationError);
}

TEST_CASE("regression error on a piecewise-linear shape respects the risk bound") {
  const std::size_t L = 1 << 14, bins = 128;
  const ShapeFunction s(ex2_shape1());
  FoldedSamples f;
  f.bins = bins;
  for (std::size_t l = 0; l < L; ++l) {
    const double x = static_cast<double>(l) / L;
    f.x.push_back(x);
    f.y.push_back(s(x));
  }
  PartitionEstimate e = partition_regress(f);
  double sq = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double d = e.evaluate(f.x[l]) - f.y[l];
    sq += d * d;
  }
  sq /= static_cast<double>(L);
  const double h = 1.0 / bins;
  const double C = lipschitz(s);
  CHECK(sq <= 10.0 * (C * C * h * h + 1.0 / (static_cast<double>(L) * h)));
}

TEST_CASE("oracle extraction recovers an unmodulated shape and maps zero to zero") {
  const std::size_t L = 1 << 16, bins = 128;
  const double N = 64;
  std::vector<double> p(L), f(L);
  const ShapeFunction s(ex2_shape2());
  for (std::size_t l = 0; l < L; ++l) {
    const double t = static_cast<double>(l) / L;
    p[l] = N * (t + 0.006 * std::sin(2.0 * std::numbers::pi * t));
    f[l] = s(p[l]);
  }
  PhaseTrack phase(p, N);
  PartitionEstimate e = rdbr_extract(UniformSignal(f), phase, N, 0, Parity::cos, bins);
  std::vector<double> truth(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double acc = 0.0;
    for (int q = 0; q < 64; ++q) acc += s((k + (q + 0.5) / 64.0) / bins);
    truth[k] = acc / 64.0;
  }
  CHECK(test::rel_l2(e.values, truth) < 2e-2);

  PartitionEstimate z = rdbr_extract(UniformSignal::zeros(L), phase, N, 1, Parity::sin, bins);
  for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("identical phases are not well differentiated") {
  std::vector<double> p(4096);
  for (std::size_t l = 0; l < p.size(); ++l) p[l] = 16.0 * l / 4096.0;
  const std::vector<std::vector<double>> phases{p, p};
  WellDiffReport r = well_diff_counts(phases, 8);
  CHECK(r.gamma == 0.0);
  CHECK_FALSE(r.well_differentiated());
}

TEST_CASE("uniform joint occupancy gives zero beta") {
  // Bin pair (m, n) of (2t, 2 b t) on L = 2 b^2 r samples is hit exactly 2r times.
  const std::size_t b = 8, r = 4, L = 2 * b * b * r;
  std::vector<double> p1(L), p2(L);
  for (std::size_t l = 0; l < L; ++l) {
    p1[l] = 2.0 * static_cast<double>(l) / L;
    p2[l] = 2.0 * b * static_cast<double>(l) / L;
  }
  const std::vector<std::vector<double>> phases{p1, p2};
  WellDiffReport rep = well_diff_counts(phases, b, 1);
  CHECK(rep.gamma == 2.0 * r);
  CHECK(rep.beta == 0.0);
  CHECK(rep.contraction == 0.0);
  CHECK(rep.well_differentiated());

  // With two bins, N t and 2 N t also cover every pair evenly.
  std::vector<double> q1(64), q2(64);
  for (std::size_t l = 0; l < 64; ++l) {
    q1[l] = 4.0 * l / 64.0;
    q2[l] = 8.0 * l / 64.0;
  }
  const std::vector<std::vector<double>> two{q1, q2};
  WellDiffReport small = well_diff_counts(two, 2);
  CHECK(small.beta == 0.0);
  CHECK(small.gamma == 16.0);
}

TEST_CASE("well-differentiation report on the two-component benchmark phases") {
  SyntheticSignal ex = gen_ex2(100, 1 << 19);
  WellDiffReport r = well_diff_report(ex.phases, 128);
  std::size_t total = 0;
  for (std::size_t c : r.pair_counts[0][1]) total += c;
  CHECK(total == (std::size_t{1} << 19));
  CHECK(r.gamma >= 0.0);
  CHECK(std::isfinite(r.beta));
  CHECK(r.contraction == r.beta);
  CHECK_THROWS_AS(well_diff_report(std::span<const PhaseTrack>(ex.phases.data(), 1), 128),
                  ValidationError);
}

TEST_CASE("property: regression reproduces bin-constant data on occupied bins") {
  auto g = test::rng(51);
  std::uniform_int_distribution<int> pickBins(2, 200), pickN(1, 2000);
  std::uniform_real_distribution<double> u(0.0, 1.0), val(-100.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t bins = static_cast<std::size_t>(pickBins(g));
    std::vector<double> level(bins);
    for (double& v : level) v = val(g);
    FoldedSamples s;
    s.bins = bins;
    const int n = pickN(g);
    for (int i = 0; i < n; ++i) {
      const double x = u(g);
      s.x.push_back(x >= 1.0 ? 0.0 : x);
      s.y.push_back(level[bin_of(s.x.back(), bins)]);
    }
    PartitionEstimate e = partition_regress(s);
    for (std::size_t k = 0; k < bins; ++k)
      if (e.occupied[k]) REQUIRE(std::abs(e.values[k] - level[k]) <= 1e-13 * std::abs(level[k]));
  }
}

TEST_CASE("property: extraction products agree with the oracle in relative L2") {
  auto g = test::rng(52);
  std::uniform_int_distribution<int> pickN(4, 40), pickExp(3, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t N = static_cast<std::size_t>(pickN(g));
    const std::size_t Ls = std::size_t{1} << pickExp(g);
    const std::size_t L = N * Ls;
    std::vector<double> p(L);
    for (std::size_t l = 0; l < L; ++l) p[l] = static_cast<double>(l) / static_cast<double>(Ls);
    PhaseTrack phase(p);
    UniformSignal f(test::random_vector(g, L));
    std::uniform_int_distribution<int> pickn(-static_cast<int>((N - 1) / 2),
                                             static_cast<int>((N - 1) / 2));
    const int n = pickn(g);
    const Parity parity = n != 0 && trial % 2 ? Parity::sin : Parity::cos;
    DsaSettings st;
    st.shape_size = Ls;
    auto [a, s] = extract_single(DsaRequest{f, phase, {n}, st}, n, parity);
    PartitionEstimate e = rdbr_extract(f, phase, static_cast<double>(N), n, parity, Ls);
    std::vector<double> oracle = e.values;
    double mean = 0.0;
    for (double v : oracle) mean += v;
    mean /= static_cast<double>(Ls);
    for (double& v : oracle) v -= mean;
    REQUIRE(test::rel_l2(s.scaled(a).values(), oracle) <= 1e-6);
  }
}

TEST_CASE("property: well-differentiation counts ignore sample order") {
  auto g = test::rng(53);
  std::uniform_int_distribution<int> pickK(2, 3), pickBins(2, 16), pickL(32, 600);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = static_cast<std::size_t>(pickK(g));
    const std::size_t L = static_cast<std::size_t>(pickL(g));
    std::vector<std::vector<double>> phases(K, std::vector<double>(L));
    for (auto& p : phases)
      for (double& v : p) v = u(g);
    std::vector<std::size_t> perm(L);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), g);
    std::vector<std::vector<double>> shuffled(K, std::vector<double>(L));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l) shuffled[k][l] = phases[k][perm[l]];
    const std::size_t bins = static_cast<std::size_t>(pickBins(g));
    WellDiffReport a = well_diff_counts(phases, bins, trial % 3);
    WellDiffReport b = well_diff_counts(shuffled, bins, trial % 3);
    REQUIRE(a.gamma == b.gamma);
    REQUIRE(a.beta == b.beta);
    REQUIRE(a.contraction == b.contraction);
    REQUIRE(a.pair_counts == b.pair_counts);
    REQUIRE(a.single_counts == b.single_counts);
  }
}
