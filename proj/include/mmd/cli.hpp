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

// Command-line front end. run() parses argv, dispatches a subcommand and maps
// failures onto exit codes: 0 ok, 2 parse, 3 validation, 4 solver, 5 I/O.

#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmd/core_model.hpp"
#include "mmd/diagnostics.hpp"
#include "mmd/dsa.hpp"
#include "mmd/errors.hpp"
#include "mmd/io.hpp"
#include "mmd/rdbr_oracle.hpp"
#include "mmd/rdsa.hpp"
#include "mmd/siggen.hpp"

namespace mmd::cli {

namespace fs = std::filesystem;

enum class Algorithm { dsa, rdsa1, rdsa2 };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "dsa") return Algorithm::dsa;
  if (s == "rdsa1") return Algorithm::rdsa1;
  if (s == "rdsa2") return Algorithm::rdsa2;
  throw ParseError("unknown algorithm '" + s + "' (expected dsa, rdsa1 or rdsa2)");
}

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dsa: return "dsa";
    case Algorithm::rdsa1: return "rdsa1";
    case Algorithm::rdsa2: return "rdsa2";
  }
  return "unknown";
}

/// Inputs, solver parameters and output options for decompose/converge.
struct RunConfig {
  fs::path signal;
  std::vector<fs::path> phases;
  RdsaConfig rdsa;
  Algorithm algorithm = Algorithm::rdsa2;
  fs::path out_dir = "mmd_out";
  io::SeriesFormat format = io::SeriesFormat::text;
  std::vector<int> bands;
};

namespace detail {

inline std::string ext(io::SeriesFormat f) {
  return f == io::SeriesFormat::binary ? ".bin" : ".txt";
}

inline io::SeriesFormat parse_format(const std::string& s) {
  if (s == "text") return io::SeriesFormat::text;
  if (s == "binary") return io::SeriesFormat::binary;
  throw ParseError("unknown format '" + s + "' (expected text or binary)");
}

inline void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ValidationError(what + " path is required");
  if (!fs::is_regular_file(p)) throw ValidationError(what + " file not found: " + p.string());
}

inline UniformSignal load_signal(const fs::path& p) {
  require_file(p, "signal");
  return UniformSignal(io::read_series(p));
}

inline PhaseTrack load_phase(const fs::path& p) {
  require_file(p, "phase");
  return PhaseTrack(io::read_series(p));
}

inline std::vector<PhaseTrack> load_phases(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw ValidationError("at least one --phase file is required");
  std::vector<PhaseTrack> out;
  for (const auto& p : paths) out.push_back(load_phase(p));
  return out;
}

template <class T>
T parse_number(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_integral_v<T>) {
      out = static_cast<T>(std::stoll(v, &used));
    } else {
      out = static_cast<T>(std::stod(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ParseError("config key " + key + ": cannot parse '" + v + "'");
  }
}

/// Applies solver keys; s, rad and red are accepted and ignored.
inline void apply_config(const std::map<std::string, std::string>& kv, RunConfig& rc) {
  for (const auto& [k, v] : kv) {
    if (k == "J1") rc.rdsa.J1 = parse_number<int>(v, k);
    else if (k == "J2") rc.rdsa.J2 = parse_number<int>(v, k);
    else if (k == "M0") rc.rdsa.M0 = parse_number<int>(v, k);
    else if (k == "M1") rc.rdsa.M1 = parse_number<int>(v, k);
    else if (k == "b") rc.rdsa.block = parse_number<int>(v, k);
    else if (k == "epsilon")
      rc.rdsa.epsilon = rc.rdsa.epsilon1 = rc.rdsa.epsilon2 = parse_number<double>(v, k);
    else if (k == "epsilon1") rc.rdsa.epsilon1 = parse_number<double>(v, k);
    else if (k == "epsilon2") rc.rdsa.epsilon2 = parse_number<double>(v, k);
    else if (k == "Ls") rc.rdsa.shape_size = parse_number<std::size_t>(v, k);
    else if (k == "nufft_tolerance") rc.rdsa.nufft_tolerance = parse_number<double>(v, k);
    else if (k == "algorithm") rc.algorithm = parse_algorithm(v);
    // L, K, fundamental_k*, s, rad, red, stop_reason and friends are informational.
  }
}

inline void write_expansion(const fs::path& dir, std::size_t k, const MimfExpansion& e) {
  io::CsvTable coef{{"n", "a", "b"}, {}};
  for (const auto& [n, t] : e.terms())
    coef.rows.push_back({static_cast<double>(n), t.a, t.b});
  io::write_csv(dir / ("coefficients_k" + std::to_string(k) + ".csv"), coef);

  io::CsvTable shapes;
  shapes.header.push_back("x");
  for (int n : e.scale_indices()) shapes.header.push_back("c" + std::to_string(n));
  for (int n : e.scale_indices()) shapes.header.push_back("s" + std::to_string(n));
  const std::size_t Ls = e.shape_size();
  for (std::size_t j = 0; j < Ls; ++j) {
    std::vector<double> row{static_cast<double>(j) / static_cast<double>(Ls)};
    for (const auto& [n, t] : e.terms()) row.push_back(t.sc[j]);
    for (const auto& [n, t] : e.terms()) row.push_back(t.ss[j]);
    shapes.rows.push_back(std::move(row));
  }
  io::write_csv(dir / ("shapes_k" + std::to_string(k) + ".csv"), shapes);
}

inline MimfExpansion read_expansion(const fs::path& dir, std::size_t k, double fundamental) {
  const io::CsvTable coef = io::read_csv(dir / ("coefficients_k" + std::to_string(k) + ".csv"));
  const io::CsvTable shapes = io::read_csv(dir / ("shapes_k" + std::to_string(k) + ".csv"));
  if (coef.header != std::vector<std::string>{"n", "a", "b"})
    throw ParseError("coefficient table header must be n,a,b");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < shapes.header.size(); ++i) column[shapes.header[i]] = i;
  auto col = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw ParseError("shape table lacks column " + name);
    std::vector<double> v;
    for (const auto& row : shapes.rows) v.push_back(row[it->second]);
    return ShapeTable::zero_mean(std::move(v));
  };
  MimfExpansion e(fundamental, shapes.rows.size());
  for (const auto& row : coef.rows) {
    const int n = static_cast<int>(row[0]);
    e.set(n, ScaleTerm{row[1], row[2], col("c" + std::to_string(n)), col("s" + std::to_string(n))});
  }
  return e;
}

inline void write_trace(const fs::path& path, const ConvergenceTrace& trace) {
  io::CsvTable t{{"j", "relative_residual"}, {}};
  for (std::size_t j = 0; j < trace.relative_residuals.size(); ++j)
    t.rows.push_back({static_cast<double>(j), trace.relative_residuals[j]});
  io::write_csv(path, t);
}

inline DecompositionResult decompose(const UniformSignal& f, const std::vector<PhaseTrack>& phases,
                                     const RunConfig& rc) {
  switch (rc.algorithm) {
    case Algorithm::dsa: {
      RdsaConfig one = rc.rdsa;
      one.J1 = 1;
      return rdsa1(f, phases, one);
    }
    case Algorithm::rdsa1: return rdsa1(f, phases, rc.rdsa);
    case Algorithm::rdsa2: return rdsa2(f, phases, rc.rdsa);
  }
  throw ValidationError("unknown algorithm");
}

/// Flags shared by decompose and converge. Values override a --config file.
struct SolverFlags {
  std::string config;
  std::string algorithm;
  std::string format = "text";
  int J1 = 0, J2 = 0, M0 = 0, M1 = 0, b = 0;
  double epsilon = 0.0, nufft_tol = 0.0;
  std::size_t Ls = 0;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key=value run config (J1, J2, M0, M1, b, epsilon, Ls)");
    opts["algorithm"] = app->add_option("--algorithm", algorithm, "dsa, rdsa1 or rdsa2");
    opts["J1"] = app->add_option("--J1", J1, "inner iteration budget");
    opts["J2"] = app->add_option("--J2", J2, "outer iteration budget (rdsa2)");
    opts["M0"] = app->add_option("--M0", M0, "band parameter M0");
    opts["M1"] = app->add_option("--M1", M1, "ring upper bound M1 (rdsa1)");
    opts["b"] = app->add_option("--b", b, "block size (rdsa2)");
    opts["epsilon"] = app->add_option("--epsilon", epsilon, "accuracy threshold");
    opts["Ls"] = app->add_option("--Ls", Ls, "shape bandwidth L_s");
    opts["nufft_tol"] = app->add_option("--nufft-tol", nufft_tol, "NUFFT tolerance");
    app->add_option("--format", format, "series output format: text or binary");
  }

  void apply(RunConfig& rc) const {
    if (!config.empty()) {
      require_file(config, "config");
      apply_config(io::read_config(config), rc);
    }
    auto set = [&](const char* k) { return opts.at(k)->count() > 0; };
    if (set("algorithm")) rc.algorithm = parse_algorithm(algorithm);
    if (set("J1")) rc.rdsa.J1 = J1;
    if (set("J2")) rc.rdsa.J2 = J2;
    if (set("M0")) rc.rdsa.M0 = M0;
    if (set("M1")) rc.rdsa.M1 = M1;
    if (set("b")) rc.rdsa.block = b;
    if (set("epsilon")) rc.rdsa.epsilon = rc.rdsa.epsilon1 = rc.rdsa.epsilon2 = epsilon;
    if (set("Ls")) rc.rdsa.shape_size = Ls;
    if (set("nufft_tol")) rc.rdsa.nufft_tolerance = nufft_tol;
    rc.format = parse_format(format);
    if (rc.algorithm == Algorithm::rdsa2 && rc.rdsa.M1)
      throw ValidationError("M1 applies to rdsa1 and dsa only");
  }
};

inline std::map<std::string, std::string> describe(const RunConfig& rc, std::size_t L,
                                                   std::span<const PhaseTrack> phases) {
  std::map<std::string, std::string> kv;
  kv["algorithm"] = to_string(rc.algorithm);
  kv["J1"] = std::to_string(rc.rdsa.J1);
  kv["J2"] = std::to_string(rc.rdsa.J2);
  kv["M0"] = std::to_string(rc.rdsa.M0);
  if (rc.rdsa.M1) kv["M1"] = std::to_string(*rc.rdsa.M1);
  kv["b"] = std::to_string(rc.rdsa.block);
  kv["epsilon"] = io::format_double(rc.rdsa.epsilon);
  kv["epsilon1"] = io::format_double(rc.rdsa.epsilon1);
  kv["epsilon2"] = io::format_double(rc.rdsa.epsilon2);
  kv["Ls"] = std::to_string(rc.rdsa.shape_size);
  kv["nufft_tolerance"] = io::format_double(rc.rdsa.nufft_tolerance);
  kv["L"] = std::to_string(L);
  kv["K"] = std::to_string(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k)
    kv["fundamental_k" + std::to_string(k)] = std::to_string(effective_fundamental(phases[k]));
  return kv;
}

}  // namespace detail

inline int cmd_decompose(const RunConfig& rc, std::ostream& out) {
  const UniformSignal f = detail::load_signal(rc.signal);
  const std::vector<PhaseTrack> phases = detail::load_phases(rc.phases);
  for (int band : rc.bands)
    if (band < 0) throw ValidationError("bands must be nonnegative");
  const DecompositionResult res = detail::decompose(f, phases, rc);

  const fs::path& dir = rc.out_dir;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    detail::write_expansion(dir, k, res.expansions[k]);
    io::write_series(dir / ("component_k" + std::to_string(k) + detail::ext(rc.format)),
                     res.components[k].vector(), rc.format);
  }
  io::write_series(dir / ("residual" + detail::ext(rc.format)), res.residual.vector(), rc.format);
  for (int band : rc.bands) {
    const UniformSignal approx = banded_approximation(res, phases, band);
    io::write_series(dir / ("approx_l" + std::to_string(band) + detail::ext(rc.format)),
                     approx.vector(), rc.format);
  }
  detail::write_trace(dir / "trace.csv", res.trace);
  auto kv = detail::describe(rc, f.size(), phases);
  kv["stop_reason"] = to_string(res.trace.stop_reason);
  kv["iterations"] = std::to_string(res.trace.relative_residuals.size() - 1);
  const double rel = f.norm() > 0.0 ? res.residual.norm() / f.norm() : 0.0;
  kv["final_relative_residual"] = io::format_double(rel);
  io::write_config(dir / "run.cfg", kv);
  out << "algorithm=" << to_string(rc.algorithm) << " components=" << phases.size()
      << " iterations=" << kv["iterations"] << " stop=" << kv["stop_reason"]
      << " relative_residual=" << kv["final_relative_residual"] << "\n";
  return 0;
}

inline int cmd_approximate(const fs::path& results, const std::vector<fs::path>& phase_paths,
                           const std::vector<int>& bands, const fs::path& signal_path,
                           const fs::path& out_dir, io::SeriesFormat format, std::ostream& out) {
  detail::require_file(results / "run.cfg", "run config");
  const auto kv = io::read_config(results / "run.cfg");
  const std::vector<PhaseTrack> phases = detail::load_phases(phase_paths);
  if (bands.empty()) throw ValidationError("at least one --band is required");
  DecompositionResult res;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const std::string key = "fundamental_k" + std::to_string(k);
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("run config lacks " + key);
    res.expansions.push_back(
        detail::read_expansion(results, k, detail::parse_number<double>(it->second, key)));
  }
  std::optional<UniformSignal> f;
  if (!signal_path.empty()) f = detail::load_signal(signal_path);
  for (int band : bands) {
    const UniformSignal approx = banded_approximation(res, phases, band);
    io::write_series(out_dir / ("approx_l" + std::to_string(band) + detail::ext(format)),
                     approx.vector(), format);
    out << "band=" << band;
    if (f) {
      const UniformSignal r = residual_operator(*f, approx);
      io::write_series(out_dir / ("residual_l" + std::to_string(band) + detail::ext(format)),
                       r.vector(), format);
      out << " relative_residual=" << io::format_double(f->norm() > 0 ? r.norm() / f->norm() : 0.0);
    }
    out << "\n";
  }
  return 0;
}

/// epsilon_j, mu_j and eta_j as a plot-ready table; undefined cells are nan.
inline io::CsvTable convergence_table(std::span<const double> residuals) {
  const std::vector<double> eta = convergence_eta(residuals);
  io::CsvTable t{{"j", "relative_residual", "mu", "eta"}, {}};
  const double nan = std::nan("");
  for (std::size_t j = 0; j < residuals.size(); ++j) {
    double mu = nan;
    if (j >= 1 && j <= eta.size() + 1) {
      const double d = std::abs(residuals[j - 1] - residuals[j]);
      if (d > 1e-15) mu = std::log(d);
    }
    const double e = j >= 1 && j <= eta.size() ? eta[j - 1] : nan;
    t.rows.push_back({static_cast<double>(j), residuals[j], mu, e});
  }
  return t;
}

inline int cmd_converge(const std::vector<double>& residuals, const fs::path& out_dir,
                        std::ostream& out) {
  const io::CsvTable t = convergence_table(residuals);
  io::write_csv(out_dir / "converge.csv", t);
  out << "j,relative_residual,mu,eta\n";
  for (const auto& row : t.rows)
    out << static_cast<int>(row[0]) << ',' << io::format_double(row[1]) << ','
        << io::format_double(row[2]) << ',' << io::format_double(row[3]) << "\n";
  return 0;
}

struct BenchCell {
  double N = 0.0;
  std::size_t L = 0;
  double t_dsa = 0.0;
  double t_rdbr = 0.0;
};

/// One dsa extraction and one regression extraction per (N, L) cell, single
/// threaded, medians over `reps` runs.
inline std::vector<BenchCell> bench(const std::vector<double>& Ns, const std::vector<int>& log2L,
                                    int reps, std::size_t Ls, std::size_t bins) {
  if (Ns.empty() || log2L.empty()) throw ValidationError("bench grid is empty");
  if (reps < 5) throw ValidationError("bench needs at least 5 repetitions");
  std::vector<BenchCell> cells;
  for (double N : Ns)
    for (int e : log2L) {
      if (e < 4 || e > 26) throw ValidationError("log2 L must lie in [4, 26]");
      const std::size_t L = std::size_t{1} << e;
      const SyntheticSignal ex = gen_ex2(N, L, ex2_shape1(), ex2_shape2(), Ls);
      DsaSettings s;
      s.shape_size = Ls;
      s.threads = 1;
      const DsaRequest req{ex.signal, ex.phases[0], {1}, s};
      BenchCell c{N, L, 0.0, 0.0};
      c.t_dsa = median_seconds([&] { (void)extract_single(req, 1, Parity::cos); }, reps);
      c.t_rdbr = median_seconds(
          [&] { (void)rdbr_extract(ex.signal, ex.phases[0], N, 1, Parity::cos, bins); }, reps);
      cells.push_back(c);
    }
  return cells;
}

inline int cmd_bench(const std::vector<double>& Ns, const std::vector<int>& log2L, int reps,
                     std::size_t Ls, std::size_t bins, const fs::path& out_dir, std::ostream& out) {
  const std::vector<BenchCell> cells = bench(Ns, log2L, reps, Ls, bins);
  io::CsvTable t{{"N", "L", "t_rdsa", "t_rdbr", "speedup"}, {}};
  for (const auto& c : cells)
    t.rows.push_back({c.N, static_cast<double>(c.L), c.t_dsa, c.t_rdbr, c.t_rdbr / c.t_dsa});
  io::write_csv(out_dir / "bench.csv", t);
  io::CsvTable slopes{{"N", "slope"}, {}};
  for (double N : Ns) {
    std::vector<double> x, y;
    for (const auto& c : cells)
      if (c.N == N) {
        x.push_back(static_cast<double>(c.L));
        y.push_back(c.t_dsa);
      }
    const double slope = x.size() >= 2 ? loglog_slope(x, y) : std::nan("");
    slopes.rows.push_back({N, slope});
  }
  io::write_csv(out_dir / "bench_slope.csv", slopes);
  out << "N,L,t_rdsa,t_rdbr,speedup\n";
  for (const auto& row : t.rows)
    out << row[0] << ',' << static_cast<std::size_t>(row[1]) << ',' << row[2] << ',' << row[3]
        << ',' << row[4] << "\n";
  for (const auto& row : slopes.rows) out << "slope N=" << row[0] << " " << row[1] << "\n";
  return 0;
}

inline int cmd_whiteness(const fs::path& input, std::size_t max_lag, const fs::path& out_csv,
                         std::ostream& out) {
  detail::require_file(input, "residual");
  const std::vector<double> x = io::read_series(input);
  if (x.empty()) throw ValidationError("residual file is empty");
  const WhitenessReport r = whiteness(x, max_lag);
  if (r.degenerate) {
    out << "degenerate=1 (zero-variance residual)\n";
    return 0;
  }
  if (!out_csv.empty()) {
    io::CsvTable t{{"lag", "autocorrelation"}, {}};
    for (std::size_t k = 0; k < r.autocorrelation.size(); ++k)
      t.rows.push_back({static_cast<double>(k), r.autocorrelation[k]});
    io::write_csv(out_csv, t);
  }
  out << "degenerate=0 band=" << io::format_double(r.band)
      << " fraction_in_band=" << io::format_double(r.fraction_in_band) << "\n";
  return 0;
}

inline int cmd_oracle(const fs::path& signal_path, const fs::path& phase_path, double N, int n,
                      const std::string& parity, std::size_t bins, const fs::path& out_csv,
                      std::ostream& out) {
  const UniformSignal f = detail::load_signal(signal_path);
  const PhaseTrack p = detail::load_phase(phase_path);
  Parity par;
  if (parity == "cos") par = Parity::cos;
  else if (parity == "sin") par = Parity::sin;
  else throw ParseError("parity must be cos or sin");
  if (N <= 0.0) N = effective_fundamental(p);
  if (bins == 0)
    bins = static_cast<std::size_t>(std::lround(static_cast<double>(f.size()) / N));
  const PartitionEstimate est = rdbr_extract(f, p, N, n, par, bins);
  io::CsvTable t{{"bin", "x", "value", "count", "occupied"}, {}};
  for (std::size_t k = 0; k < est.bins(); ++k)
    t.rows.push_back({static_cast<double>(k), static_cast<double>(k) * est.h(), est.values[k],
                      static_cast<double>(est.counts[k]), static_cast<double>(est.occupied[k])});
  io::write_csv(out_csv, t);
  std::size_t empty = 0;
  for (auto o : est.occupied) empty += o ? 0 : 1;
  out << "bins=" << bins << " empty_bins=" << empty << "\n";
  return 0;
}

inline int cmd_generate(const std::string& kind, double N, std::size_t L, std::size_t Ls,
                        double noise, std::uint64_t seed, const fs::path& shape_config,
                        const fs::path& out_dir, io::SeriesFormat format, std::ostream& out) {
  SyntheticSignal s;
  std::map<std::string, std::string> kv;
  if (kind == "ex2") {
    s = gen_ex2(N, L, ex2_shape1(), ex2_shape2(), Ls);
  } else if (kind == "ex3") {
    s = gen_ex3(L, ecg_shape1(), ecg_shape2(), Ls);
  } else if (kind == "custom") {
    detail::require_file(shape_config, "shape config");
    const auto shape_kv = io::read_config(shape_config);
    const ShapeSpec spec = shape_spec_from_config(shape_kv);
    const ShapeFunction fn(spec);
    if (!(N >= 2.0)) throw ValidationError("custom signal needs N >= 2");
    if (L < UniformSignal::kMinLength) throw ValidationError("custom signal needs L >= 16");
    std::vector<double> p(L), v(L);
    for (std::size_t l = 0; l < L; ++l) {
      p[l] = N * static_cast<double>(l) / static_cast<double>(L);
      v[l] = fn(p[l]);
    }
    s.phases.emplace_back(std::move(p), N);
    s.components.emplace_back(v);
    s.signal = UniformSignal(std::move(v));
    MimfExpansion e(N, Ls);
    e.set(0, ScaleTerm{1.0, 0.0, gen_shape(spec, Ls), ShapeTable::zero(Ls)});
    s.expansions.push_back(std::move(e));
    kv = to_config(spec);
  } else {
    throw ParseError("unknown signal kind '" + kind + "' (expected ex2, ex3 or custom)");
  }
  const UniformSignal noisy = add_noise(s.signal, noise, seed);
  io::write_series(out_dir / ("signal" + detail::ext(format)), noisy.vector(), format);
  for (std::size_t k = 0; k < s.phases.size(); ++k) {
    const std::string id = std::to_string(k);
    io::write_series(out_dir / ("phase_k" + id + detail::ext(format)),
                     std::vector<double>(s.phases[k].values().begin(), s.phases[k].values().end()),
                     format);
    io::write_series(out_dir / "truth" / ("component_k" + id + detail::ext(format)),
                     s.components[k].vector(), format);
    detail::write_expansion(out_dir / "truth", k, s.expansions[k]);
    kv["fundamental_k" + id] = std::to_string(effective_fundamental(s.phases[k]));
  }
  kv["kind"] = kind;
  kv["L"] = std::to_string(L);
  kv["Ls"] = std::to_string(Ls);
  kv["K"] = std::to_string(s.phases.size());
  kv["noise"] = io::format_double(noise);
  kv["seed"] = std::to_string(seed);
  io::write_config(out_dir / "run.cfg", kv);
  io::write_config(out_dir / "truth" / "run.cfg", kv);
  out << "kind=" << kind << " L=" << L << " components=" << s.phases.size() << "\n";
  return 0;
}

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Multiresolution mode decomposition toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic signal, phases and ground truth");
  std::string g_kind = "ex2", g_format = "text", g_out = "mmd_data", g_shape;
  double g_N = 100.0, g_noise = 0.0;
  std::size_t g_L = 65536, g_Ls = 1000;
  std::uint64_t g_seed = 0;
  gen->add_option("--kind", g_kind, "ex2, ex3 or custom");
  gen->add_option("--N", g_N, "fundamental (ex2, custom)");
  gen->add_option("--L", g_L, "sample count");
  gen->add_option("--Ls", g_Ls, "ground-truth shape bandwidth");
  gen->add_option("--noise", g_noise, "Gaussian noise sigma");
  gen->add_option("--seed", g_seed, "noise seed");
  gen->add_option("--shape-config", g_shape, "shape.* keys for --kind custom");
  gen->add_option("--out", g_out, "output directory");
  gen->add_option("--format", g_format, "text or binary");

  // decompose
  auto* dec = app.add_subcommand("decompose", "run dsa, rdsa1 or rdsa2 on a signal");
  RunConfig rc;
  detail::SolverFlags dec_flags;
  std::string d_signal, d_out = "mmd_out";
  std::vector<std::string> d_phases;
  dec->add_option("--signal", d_signal, "signal file");
  dec->add_option("--phase", d_phases, "phase file, once per component");
  dec->add_option("--bands", rc.bands, "banded approximations M_l to write");
  dec->add_option("--out", d_out, "output directory");
  dec_flags.attach(dec);

  // approximate
  auto* apx = app.add_subcommand("approximate", "banded approximations from saved results");
  std::string a_results, a_signal, a_out = "mmd_approx", a_format = "text";
  std::vector<std::string> a_phases;
  std::vector<int> a_bands;
  apx->add_option("--results", a_results, "decompose output directory")->required();
  apx->add_option("--phase", a_phases, "phase file, once per component");
  apx->add_option("--band", a_bands, "band l (repeatable)");
  apx->add_option("--signal", a_signal, "original signal, to also write R_l residuals");
  apx->add_option("--out", a_out, "output directory");
  apx->add_option("--format", a_format, "text or binary");

  // converge
  auto* cvg = app.add_subcommand("converge", "residual, mu and eta convergence table");
  RunConfig cc;
  detail::SolverFlags cvg_flags;
  std::string c_trace, c_signal, c_out = "mmd_converge";
  std::vector<std::string> c_phases;
  cvg->add_option("--trace", c_trace, "trace.csv from decompose (skips solving)");
  cvg->add_option("--signal", c_signal, "signal file");
  cvg->add_option("--phase", c_phases, "phase file, once per component");
  cvg->add_option("--out", c_out, "output directory");
  cvg_flags.attach(cvg);

  // bench
  auto* bch = app.add_subcommand("bench", "time dsa against the regression oracle");
  std::vector<double> b_N{100.0};
  std::vector<int> b_log2L{10, 11, 12, 13, 14, 15, 16, 17, 18};
  int b_reps = 5;
  std::size_t b_Ls = 1000, b_bins = 128;
  std::string b_out = "mmd_bench";
  bch->add_option("--N", b_N, "fundamentals");
  bch->add_option("--log2-L", b_log2L, "log2 of sample counts");
  bch->add_option("--reps", b_reps, "repetitions per cell (>= 5)");
  bch->add_option("--Ls", b_Ls, "shape bandwidth");
  bch->add_option("--bins", b_bins, "regression bins");
  bch->add_option("--out", b_out, "output directory");

  // whiteness
  auto* wht = app.add_subcommand("whiteness", "autocorrelation of a residual");
  std::string w_input, w_out;
  std::size_t w_lag = 50;
  wht->add_option("--input", w_input, "residual file")->required();
  wht->add_option("--max-lag", w_lag, "largest lag");
  wht->add_option("--out", w_out, "autocorrelation csv");

  // oracle
  auto* orc = app.add_subcommand("oracle", "partition-regression shape estimate");
  std::string o_signal, o_phase, o_parity = "cos", o_out = "oracle.csv";
  double o_N = 0.0;
  int o_n = 0;
  std::size_t o_bins = 0;
  orc->add_option("--signal", o_signal, "signal file");
  orc->add_option("--phase", o_phase, "phase file");
  orc->add_option("--N", o_N, "fundamental (default: effective)");
  orc->add_option("--n", o_n, "scale index");
  orc->add_option("--parity", o_parity, "cos or sin");
  orc->add_option("--bins", o_bins, "bin count (default: L / N)");
  orc->add_option("--out", o_out, "output csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::parse);
  }

  try {
    if (*gen)
      return cmd_generate(g_kind, g_N, g_L, g_Ls, g_noise, g_seed, g_shape, g_out,
                          detail::parse_format(g_format), out);
    if (*dec) {
      rc.signal = d_signal;
      for (const auto& p : d_phases) rc.phases.emplace_back(p);
      rc.out_dir = d_out;
      dec_flags.apply(rc);
      return cmd_decompose(rc, out);
    }
    if (*apx) {
      std::vector<fs::path> ps(a_phases.begin(), a_phases.end());
      return cmd_approximate(a_results, ps, a_bands, a_signal, a_out,
                             detail::parse_format(a_format), out);
    }
    if (*cvg) {
      std::vector<double> residuals;
      if (!c_trace.empty()) {
        detail::require_file(c_trace, "trace");
        const io::CsvTable t = io::read_csv(c_trace);
        if (t.header.size() < 2 || t.header[1] != "relative_residual")
          throw ParseError("trace csv must have a relative_residual column");
        for (const auto& row : t.rows) residuals.push_back(row[1]);
      } else {
        cc.signal = c_signal;
        for (const auto& p : c_phases) cc.phases.emplace_back(p);
        cvg_flags.apply(cc);
        const UniformSignal f = detail::load_signal(cc.signal);
        const auto phases = detail::load_phases(cc.phases);
        residuals = detail::decompose(f, phases, cc).trace.relative_residuals;
      }
      return cmd_converge(residuals, c_out, out);
    }
    if (*bch) return cmd_bench(b_N, b_log2L, b_reps, b_Ls, b_bins, b_out, out);
    if (*wht) return cmd_whiteness(w_input, w_lag, w_out, out);
    if (*orc) return cmd_oracle(o_signal, o_phase, o_N, o_n, o_parity, o_bins, o_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::solver);
  }
  return 0;
}

}  // namespace mmd::cli
