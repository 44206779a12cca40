/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_EXPERIMENT_HPP
#define RPCHOL_EXPERIMENT_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rpchol/datasets.hpp"
#include "rpchol/io.hpp"
#include "rpchol/oracle.hpp"
#include "rpchol/parallel.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

enum class Method { Simple, Block, Accelerated, AcceleratedLowMem, RBRP };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Simple: return "simple";
    case Method::Block: return "block";
    case Method::Accelerated: return "accelerated";
    case Method::AcceleratedLowMem: return "accelerated-lowmem";
    case Method::RBRP: return "rbrp";
  }
  throw std::invalid_argument("unknown method");
}

inline Method method_from_name(const std::string& name) {
  if (name == "simple") return Method::Simple;
  if (name == "block") return Method::Block;
  if (name == "accelerated") return Method::Accelerated;
  if (name == "accelerated-lowmem") return Method::AcceleratedLowMem;
  if (name == "rbrp") return Method::RBRP;
  throw std::invalid_argument("unknown method: " + name);
}

inline std::string dataset_kind_name(DatasetSpec::Kind kind) {
  switch (kind) {
    case DatasetSpec::Kind::Smile: return "smile";
    case DatasetSpec::Kind::Spiral: return "spiral";
    case DatasetSpec::Kind::OutlierCloud: return "outliers";
    case DatasetSpec::Kind::GaussianCloud: return "gaussian";
    case DatasetSpec::Kind::FromFile: return "file";
  }
  throw std::invalid_argument("unknown dataset kind");
}

struct ExperimentConfig {
  DatasetSpec dataset;
  KernelSpec kernel;
  bool bandwidth_median = false;  // overrides kernel.bandwidth when set
  Eigen::Index median_sample = 1000;
  std::vector<Method> methods;
  Eigen::Index rank = 0;
  Eigen::Index block_size = 1;
  Eigen::Index trials = 1;
  std::uint64_t seed = 0;
  // The runner materializes the kernel matrix once only when N is at or
  // below this threshold; above it every access goes through the oracle.
  Eigen::Index materialize_threshold = Eigen::Index{1} << 14;
  // Comparisons default to direct distance evaluation: the inner-product
  // shortcut loses the low-order bits of tiny distances, which block
  // RPCholesky cannot tolerate on cluster-heavy data.
  DistanceMode distance_mode = DistanceMode::Direct;
  int n_threads = 1;
  bool warmup = true;
};

struct TrialRow {
  Method method = Method::Simple;
  Eigen::Index trial = 0;
  Eigen::Index accepted_rank = 0;
  double wall_ms = 0.0;
  double rel_trace_error = std::numeric_limits<double>::quiet_NaN();
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  double ratio_vs_simple = std::numeric_limits<double>::quiet_NaN();
  IndexList pivots;
  std::string error;  // empty on success
};

struct MethodAggregate {
  Method method = Method::Simple;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_wall_ms = 0.0;
  double std_wall_ms = 0.0;
  double mean_acceptance = 0.0;
};

struct ExperimentReport {
  Eigen::Index rank = 0;
  Eigen::Index block_size = 1;
  std::string dataset_name;
  double bandwidth_used = 0.0;
  std::vector<TrialRow> rows;
  std::vector<MethodAggregate> aggregates;
};

/// Optional wrapper applied to the oracle the runner constructs; all matrix
/// traffic (including materialization for small N) flows through it.
using OracleShim =
    std::function<std::unique_ptr<PsdOracle>(std::unique_ptr<PsdOracle>)>;

namespace detail {

struct MethodRun {
  LowRankApprox approx;       // empty factor for the low-memory method
  PivotTrace trace;
  Eigen::VectorXd residual_diag;
};

inline MethodRun run_method(Method method, const PsdOracle& oracle,
                            Eigen::Index rank, Eigen::Index block,
                            std::uint64_t seed) {
  MethodRun out;
  switch (method) {
    case Method::Simple: {
      CholeskyResult res = simple_rpcholesky(oracle, rank, seed);
      out.approx = std::move(res.approx);
      out.trace = std::move(res.trace);
      out.residual_diag = std::move(res.residual_diag);
      return out;
    }
    case Method::Block: {
      CholeskyResult res = block_rpcholesky(oracle, RunConfig::until_rank(rank, block, seed));
      out.approx = std::move(res.approx);
      out.trace = std::move(res.trace);
      out.residual_diag = std::move(res.residual_diag);
      return out;
    }
    case Method::Accelerated: {
      CholeskyResult res =
          accelerated_rpcholesky(oracle, RunConfig::until_rank(rank, block, seed));
      out.approx = std::move(res.approx);
      out.trace = std::move(res.trace);
      out.residual_diag = std::move(res.residual_diag);
      return out;
    }
    case Method::AcceleratedLowMem: {
      LowMemResult res =
          accelerated_rpcholesky_lowmem(oracle, RunConfig::until_rank(rank, block, seed));
      out.approx.pivots = std::move(res.pivots);
      out.approx.chol_factor = std::move(res.chol_factor);
      out.trace = std::move(res.trace);
      out.residual_diag = std::move(res.residual_diag);
      return out;
    }
    case Method::RBRP: {
      CholeskyResult res = rbrp_cholesky(oracle, RunConfig::until_rank(rank, block, seed));
      out.approx = std::move(res.approx);
      out.trace = std::move(res.trace);
      out.residual_diag = std::move(res.residual_diag);
      return out;
    }
  }
  throw std::invalid_argument("unknown method");
}

inline double error_for_run(const MethodRun& run, const PsdOracle& oracle,
                            double trace_a) {
  if (run.approx.factor.size() > 0) {
    return relative_trace_error(oracle, run.approx);
  }
  // Low-memory path: the tracked residual diagonal carries the trace.
  return std::clamp(run.residual_diag.sum() / trace_a, 0.0, 1.0);
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& config,
                                       const OracleShim& shim = {}) {
  if (config.methods.empty()) {
    throw std::invalid_argument("run_experiment: methods must be nonempty");
  }
  if (config.rank < 1) throw std::invalid_argument("run_experiment: rank must be >= 1");
  if (config.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");

  DataMatrix data = generate_dataset(config.dataset);
  if (config.rank > data.n_points()) {
    throw std::invalid_argument("run_experiment: rank exceeds dataset size");
  }
  KernelSpec spec = config.kernel;
  if (config.bandwidth_median) {
    spec = KernelSpec(config.kernel.kind,
                      median_bandwidth(data, config.median_sample, config.seed));
  }
  const Eigen::Index n = data.n_points();
  const DistanceMode mode =
      is_l2_translation_invariant(spec.kind) ? config.distance_mode
                                             : DistanceMode::Direct;
  std::unique_ptr<PsdOracle> oracle =
      std::make_unique<KernelOracle>(std::move(data), spec, mode, config.n_threads);
  if (shim) oracle = shim(std::move(oracle));
  if (n <= config.materialize_threshold) {
    // Small problems: generate the kernel matrix once, through the oracle, in
    // row panels, and reuse it across all trials.
    Eigen::MatrixXd dense(n, n);
    IndexList cols = all_indices(n);
    constexpr Eigen::Index kRows = 1024;
    for (Eigen::Index r0 = 0; r0 < n; r0 += kRows) {
      const Eigen::Index height = std::min(kRows, n - r0);
      IndexList rows(static_cast<std::size_t>(height));
      std::iota(rows.begin(), rows.end(), r0);
      dense.middleRows(r0, height) = oracle->submatrix(rows, cols);
    }
    oracle = std::make_unique<DenseOracle>(std::move(dense));
    if (shim) oracle = shim(std::move(oracle));
  }
  const double trace_a = oracle->diag().sum();

  ExperimentReport report;
  report.rank = config.rank;
  report.block_size = config.block_size;
  report.dataset_name = dataset_kind_name(config.dataset.kind);
  report.bandwidth_used = spec.bandwidth;
  report.rows.resize(static_cast<std::size_t>(config.methods.size()) *
                     static_cast<std::size_t>(config.trials));

  SplitMix64 root(config.seed);
  const Eigen::Index n_methods = static_cast<Eigen::Index>(config.methods.size());
  // One untimed warmup per method stabilizes caches before timing.
  if (config.warmup) {
    for (Eigen::Index m = 0; m < n_methods; ++m) {
      const Eigen::Index warm_rank = std::max<Eigen::Index>(1, config.rank / 10);
      std::uint64_t warm_seed =
          root.split(static_cast<std::uint64_t>(m)).split(~std::uint64_t{0}).next_u64();
      try {
        detail::run_method(config.methods[static_cast<std::size_t>(m)], *oracle,
                           warm_rank, config.block_size, warm_seed);
      } catch (const std::exception&) {
        // Warmup failures are reported by the timed trial instead.
      }
    }
  }

  const Eigen::Index n_runs = n_methods * config.trials;
  parallel_for(n_runs, config.n_threads, [&](std::ptrdiff_t task) {
    const Eigen::Index m = static_cast<Eigen::Index>(task) / config.trials;
    const Eigen::Index trial = static_cast<Eigen::Index>(task) % config.trials;
    const Method method = config.methods[static_cast<std::size_t>(m)];
    TrialRow row;
    row.method = method;
    row.trial = trial;
    const std::uint64_t run_seed = root.split(static_cast<std::uint64_t>(m))
                                       .split(static_cast<std::uint64_t>(trial))
                                       .next_u64();
    try {
      const auto start = std::chrono::steady_clock::now();
      detail::MethodRun run = detail::run_method(method, *oracle, config.rank,
                                                 config.block_size, run_seed);
      const auto stop = std::chrono::steady_clock::now();
      row.wall_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
      row.accepted_rank = static_cast<Eigen::Index>(run.approx.pivots.size());
      row.rel_trace_error = detail::error_for_run(run, *oracle, trace_a);
      row.acceptance_rate = run.trace.acceptance_rate();
      row.pivots = std::move(run.approx.pivots);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows[static_cast<std::size_t>(task)] = std::move(row);
  });

  // Ratios pair trial j of each method with trial j of the Simple baseline.
  Eigen::Index simple_offset = -1;
  for (Eigen::Index m = 0; m < n_methods; ++m) {
    if (config.methods[static_cast<std::size_t>(m)] == Method::Simple) {
      simple_offset = m * config.trials;
      break;
    }
  }
  if (simple_offset >= 0) {
    for (auto& row : report.rows) {
      const auto& baseline =
          report.rows[static_cast<std::size_t>(simple_offset + row.trial)];
      if (row.error.empty() && baseline.error.empty()) {
        row.ratio_vs_simple = row.rel_trace_error / baseline.rel_trace_error;
      }
    }
  }

  for (Eigen::Index m = 0; m < n_methods; ++m) {
    MethodAggregate agg;
    agg.method = config.methods[static_cast<std::size_t>(m)];
    double n_ok = 0.0;
    for (Eigen::Index t = 0; t < config.trials; ++t) {
      const auto& row = report.rows[static_cast<std::size_t>(m * config.trials + t)];
      if (!row.error.empty()) continue;
      n_ok += 1.0;
      agg.mean_error += row.rel_trace_error;
      agg.mean_wall_ms += row.wall_ms;
      agg.mean_acceptance += row.acceptance_rate;
    }
    if (n_ok > 0.0) {
      agg.mean_error /= n_ok;
      agg.mean_wall_ms /= n_ok;
      agg.mean_acceptance /= n_ok;
      for (Eigen::Index t = 0; t < config.trials; ++t) {
        const auto& row = report.rows[static_cast<std::size_t>(m * config.trials + t)];
        if (!row.error.empty()) continue;
        agg.std_error += (row.rel_trace_error - agg.mean_error) *
                         (row.rel_trace_error - agg.mean_error);
        agg.std_wall_ms +=
            (row.wall_ms - agg.mean_wall_ms) * (row.wall_ms - agg.mean_wall_ms);
      }
      agg.std_error = std::sqrt(agg.std_error / n_ok);
      agg.std_wall_ms = std::sqrt(agg.std_wall_ms / n_ok);
    }
    report.aggregates.push_back(agg);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Column-generation throughput harness.

struct ThroughputRow {
  Eigen::Index block_size = 1;
  DistanceMode mode = DistanceMode::Direct;
  Eigen::Index columns = 0;
  double wall_ms = 0.0;
  double columns_per_sec = 0.0;
};

/// Generates roughly 1000 random columns in blocks of each requested size and
/// reports the throughput, in both distance modes where the kernel allows.
inline std::vector<ThroughputRow> bench_column_throughput(
    const DataMatrix& data, const KernelSpec& spec,
    const std::vector<Eigen::Index>& block_sizes, std::uint64_t seed = 0,
    int n_threads = 1) {
  std::vector<ThroughputRow> rows;
  std::vector<DistanceMode> modes{DistanceMode::Direct};
  if (is_l2_translation_invariant(spec.kind)) {
    modes.push_back(DistanceMode::GramTrick);
  }
  const Eigen::Index n = data.n_points();
  for (Eigen::Index b : block_sizes) {
    if (b < 1) throw std::invalid_argument("bench_column_throughput: block size must be >= 1");
    for (DistanceMode mode : modes) {
      KernelOracle oracle(data, spec, mode, n_threads);
      SplitMix64 rng(seed);
      const Eigen::Index n_blocks = (1000 + b - 1) / b;
      const auto start = std::chrono::steady_clock::now();
      double sink = 0.0;
      for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
        IndexList cols(static_cast<std::size_t>(b));
        for (Eigen::Index j = 0; j < b; ++j) {
          cols[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(
              rng.next_u64() % static_cast<std::uint64_t>(n));
        }
        sink += oracle.columns(cols)(0, 0);
      }
      const auto stop = std::chrono::steady_clock::now();
      // Keep the generated blocks observable so the timed loop cannot be
      // elided.
      volatile double keep = sink;
      (void)keep;
      ThroughputRow row;
      row.block_size = b;
      row.mode = mode;
      row.columns = n_blocks * b;
      row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      row.columns_per_sec =
          row.wall_ms > 0.0 ? 1000.0 * static_cast<double>(row.columns) / row.wall_ms
                            : std::numeric_limits<double>::infinity();
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV emission.

inline void write_experiment_csv(const std::string& path,
                                 const ExperimentReport& report) {
  std::ofstream os = detail::open_out(path);
  os << "method,trial,rank,accepted_rank,wall_ms,rel_trace_error,acceptance_rate,"
        "ratio_vs_simple,error\n";
  for (const auto& row : report.rows) {
    os << method_name(row.method) << ',' << row.trial << ',' << report.rank << ','
       << row.accepted_rank << ',' << detail::format_double(row.wall_ms) << ','
       << detail::format_double(row.rel_trace_error) << ','
       << detail::format_double(row.acceptance_rate) << ','
       << detail::format_double(row.ratio_vs_simple) << ',' << row.error << '\n';
  }
}

inline void write_throughput_csv(const std::string& path,
                                 const std::vector<ThroughputRow>& rows) {
  std::ofstream os = detail::open_out(path);
  os << "block_size,mode,columns,wall_ms,columns_per_sec\n";
  for (const auto& row : rows) {
    os << row.block_size << ','
       << (row.mode == DistanceMode::Direct ? "direct" : "gram") << ','
       << row.columns << ',' << detail::format_double(row.wall_ms) << ','
       << detail::format_double(row.columns_per_sec) << '\n';
  }
}

/// Tidy per-figure CSV exports from one or more experiment reports.
inline void plot_data_export(const std::vector<ExperimentReport>& reports,
                             const std::string& out_dir) {
  if (reports.empty()) throw std::invalid_argument("plot_data_export: no reports");
  {
    std::ofstream os = detail::open_out(out_dir + "/error_vs_rank.csv");
    os << "method,rank,trial,rel_trace_error,wall_ms,acceptance_rate\n";
    for (const auto& rep : reports) {
      for (const auto& row : rep.rows) {
        if (!row.error.empty()) continue;
        os << method_name(row.method) << ',' << rep.rank << ',' << row.trial << ','
           << detail::format_double(row.rel_trace_error) << ','
           << detail::format_double(row.wall_ms) << ','
           << detail::format_double(row.acceptance_rate) << '\n';
      }
    }
  }
  {
    std::ofstream os = detail::open_out(out_dir + "/time_vs_method.csv");
    os << "method,rank,mean_wall_ms,std_wall_ms\n";
    for (const auto& rep : reports) {
      for (const auto& agg : rep.aggregates) {
        os << method_name(agg.method) << ',' << rep.rank << ','
           << detail::format_double(agg.mean_wall_ms) << ','
           << detail::format_double(agg.std_wall_ms) << '\n';
      }
    }
  }
  {
    std::ofstream os = detail::open_out(out_dir + "/ratio_vs_example.csv");
    os << "method,example,rank,mean_ratio\n";
    for (const auto& rep : reports) {
      for (const auto& agg : rep.aggregates) {
        double mean_ratio = 0.0;
        double n_ok = 0.0;
        for (const auto& row : rep.rows) {
          if (row.method != agg.method || !row.error.empty()) continue;
          if (std::isnan(row.ratio_vs_simple)) continue;
          mean_ratio += row.ratio_vs_simple;
          n_ok += 1.0;
        }
        if (n_ok == 0.0) continue;
        os << method_name(agg.method) << ',' << rep.dataset_name << ',' << rep.rank
           << ',' << detail::format_double(mean_ratio / n_ok) << '\n';
      }
    }
  }
}

}  // namespace rpchol

#endif  // RPCHOL_EXPERIMENT_HPP
