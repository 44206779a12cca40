/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 *
 * Command-line driver: dataset generation, low-rank approximation, kernel
 * ridge regression, error-bound evaluation, and benchmarking.
 */
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpchol/rpchol.hpp"

namespace {

using namespace rpchol;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

struct DatasetOpts {
  std::string kind = "gaussian";
  Eigen::Index n = 1000;
  Eigen::Index dim = 2;
  double radius = 10.0;
  double noise = 0.05;
  double turns = 3.0;
  double scale = 1.0;
  Eigen::Index outliers = 50;
  double shift = 10.0;
  std::string points_file;
  bool header = false;
  bool libsvm = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--dataset", kind, "smile|spiral|outliers|gaussian|file");
    cmd->add_option("--n", n, "number of points");
    cmd->add_option("--dim", dim, "cloud dimension");
    cmd->add_option("--radius", radius, "smile radius");
    cmd->add_option("--noise", noise, "smile jitter standard deviation");
    cmd->add_option("--turns", turns, "spiral turns");
    cmd->add_option("--scale", scale, "spiral length scale");
    cmd->add_option("--outliers", outliers, "outlier count");
    cmd->add_option("--shift", shift, "outlier shift distance");
    cmd->add_option("--points", points_file, "point-set CSV (dataset=file)");
    cmd->add_flag("--header", header, "skip one CSV header line");
    cmd->add_flag("--libsvm", libsvm, "points file is LIBSVM format");
  }

  DatasetSpec spec(std::uint64_t seed) const {
    if (kind == "smile") return DatasetSpec::smile(n, radius, noise, seed);
    if (kind == "spiral") return DatasetSpec::spiral(n, turns, scale, seed);
    if (kind == "outliers") return DatasetSpec::outlier_cloud(n, dim, outliers, shift, seed);
    if (kind == "gaussian") return DatasetSpec::gaussian_cloud(n, dim, seed);
    if (kind == "file") {
      if (points_file.empty()) {
        throw CLI::ValidationError("--points is required with --dataset file");
      }
      auto format = libsvm ? DatasetSpec::FileFormat::Libsvm
                           : (header ? DatasetSpec::FileFormat::CsvHeader
                                     : DatasetSpec::FileFormat::Csv);
      return DatasetSpec::from_file(points_file, format);
    }
    throw CLI::ValidationError("unknown dataset kind: " + kind);
  }
};

struct KernelOpts {
  std::string kernel = "gaussian";
  std::string sigma = "1.0";  // literal value or "auto" (median heuristic)
  Eigen::Index median_sample = 1000;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "gaussian|l1laplace|matern32|matern52");
    cmd->add_option("--sigma", sigma, "bandwidth value, 'auto' (median heuristic), or 'sqrt-d'");
    cmd->add_option("--median-sample", median_sample,
                    "subsample size for the median heuristic");
  }

  KernelSpec resolve(const DataMatrix& data, std::uint64_t seed) const {
    const KernelKind kind = kernel_kind_from_name(kernel);
    if (sigma == "auto") {
      return KernelSpec(kind, median_bandwidth(data, median_sample, seed));
    }
    if (sigma == "sqrt-d") {
      return KernelSpec(kind, std::sqrt(static_cast<double>(data.dim())));
    }
    return KernelSpec(kind, std::stod(sigma));
  }
};

double parse_mu(const std::string& text, Eigen::Index n) {
  // "1e-9N" multiplies the prefix by the training-set size.
  if (!text.empty() && (text.back() == 'N' || text.back() == 'n')) {
    return std::stod(text.substr(0, text.size() - 1)) * static_cast<double>(n);
  }
  return std::stod(text);
}

std::string require_out(const GlobalOpts& g) {
  if (g.out.empty()) throw CLI::ValidationError("--out is required");
  return g.out;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const GlobalOpts& g, const DatasetOpts& d) {
  DataMatrix data = generate_dataset(d.spec(g.seed));
  write_points_csv(require_out(g), data.points());
  std::cout << "wrote " << data.n_points() << " points of dimension " << data.dim()
            << " to " << g.out << "\n";
  return kExitOk;
}

struct ApproxOpts {
  std::string method = "accelerated";
  Eigen::Index rank = 0;
  Eigen::Index rounds = 0;
  Eigen::Index block = 1;
  double stop_tol = 0.0;
  std::string matrix_file;   // dense psd RPQF input
  std::string distance_mode = "auto";
};

RunConfig make_run_config(const ApproxOpts& a, std::uint64_t seed) {
  RunConfig cfg;
  if (a.rank > 0) {
    cfg = RunConfig::until_rank(a.rank, a.block, seed);
  } else if (a.rounds > 0) {
    cfg = RunConfig::fixed_rounds(a.rounds, a.block, seed);
  } else {
    throw CLI::ValidationError("one of --rank or --rounds is required");
  }
  cfg.stop_tol = a.stop_tol;
  return cfg;
}

int cmd_approx(const GlobalOpts& g, const DatasetOpts& d, const KernelOpts& k,
               const ApproxOpts& a) {
  const std::string out = require_out(g);
  if (a.method == "rpqr" || a.method == "accelerated-rpqr") {
    if (a.matrix_file.empty()) {
      throw CLI::ValidationError("QR methods need --matrix <file.rpqf>");
    }
    Eigen::MatrixXd b = read_rpqf(a.matrix_file);
    QrResult res = (a.method == "rpqr")
                       ? rp_qr(b, a.rank, g.seed)
                       : accelerated_rp_qr(b, make_run_config(a, g.seed));
    write_rpqf(out + ".q.rpqf", res.approx.q_factor);
    write_rpqf(out + ".f.rpqf", res.approx.f_factor);
    write_pivot_trace_csv(out + ".trace.csv", res.trace);
    std::cout << "rank " << res.approx.rank() << " approximation written to " << out
              << ".{q,f}.rpqf\n";
    return kExitOk;
  }

  std::unique_ptr<PsdOracle> oracle;
  if (!a.matrix_file.empty()) {
    oracle = std::make_unique<DenseOracle>(read_rpqf(a.matrix_file));
  } else {
    DataMatrix data = generate_dataset(d.spec(g.seed));
    KernelSpec spec = k.resolve(data, g.seed);
    DistanceMode mode = a.distance_mode == "direct" ? DistanceMode::Direct
                        : a.distance_mode == "gram" ? DistanceMode::GramTrick
                                                    : default_distance_mode(spec.kind);
    oracle = std::make_unique<KernelOracle>(std::move(data), spec, mode, g.threads);
  }

  LowRankApprox approx;
  PivotTrace trace;
  if (a.method == "simple") {
    CholeskyResult res = simple_rpcholesky(*oracle, a.rank, g.seed);
    approx = std::move(res.approx);
    trace = std::move(res.trace);
  } else if (a.method == "accelerated-lowmem") {
    LowMemResult res = accelerated_rpcholesky_lowmem(*oracle, make_run_config(a, g.seed));
    approx.pivots = std::move(res.pivots);
    approx.chol_factor = std::move(res.chol_factor);
    approx.factor.resize(oracle->dimension(), 0);
    trace = std::move(res.trace);
  } else {
    RunConfig cfg = make_run_config(a, g.seed);
    CholeskyResult res = a.method == "block"         ? block_rpcholesky(*oracle, cfg)
                         : a.method == "accelerated" ? accelerated_rpcholesky(*oracle, cfg)
                         : a.method == "rbrp"        ? rbrp_cholesky(*oracle, cfg)
                                                     : throw CLI::ValidationError(
                                                           "unknown method: " + a.method);
    approx = std::move(res.approx);
    trace = std::move(res.trace);
  }

  if (a.method == "accelerated-lowmem") {
    // Pivots and Cholesky factor define the approximation implicitly; store
    // them in the factor file with an empty factor payload.
    LowRankApprox stub;
    stub.factor.resize(oracle->dimension(), 0);
    write_rpcf(out, stub);
    write_rpqf(out + ".chol.rpqf", approx.chol_factor);
    write_vector_csv(out + ".pivots.csv",
                     Eigen::Map<const Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1>>(
                         approx.pivots.data(), static_cast<Eigen::Index>(approx.pivots.size()))
                         .cast<double>());
  } else {
    write_rpcf(out, approx);
    std::cout << "relative trace error "
              << relative_trace_error(*oracle, approx) << "\n";
  }
  write_pivot_trace_csv(out + ".trace.csv", trace);
  std::cout << "accepted " << approx.pivots.size() << " pivots, acceptance rate "
            << trace.acceptance_rate() << "\n";
  return kExitOk;
}

struct KrrOpts {
  std::string train;
  std::string targets;
  bool header = false;
  std::string mu = "1e-9N";
  Eigen::Index rank = 200;
  Eigen::Index block = 50;
  double tol = 1e-3;
  Eigen::Index max_iters = 500;
  std::string test_points;
  std::string test_targets;
  std::string pred_out;
};

int cmd_krr(const GlobalOpts& g, const KernelOpts& k, const KrrOpts& opts) {
  const std::string out = require_out(g);
  if (opts.train.empty() || opts.targets.empty()) {
    throw CLI::ValidationError("--train and --targets are required");
  }
  DataMatrix data = read_points_csv(opts.train, opts.header);
  Eigen::VectorXd y = read_vector_csv(opts.targets, opts.header);
  KernelSpec spec = k.resolve(data, g.seed);
  const double mu = parse_mu(opts.mu, data.n_points());
  KrrOptions kopts;
  kopts.max_iters = opts.max_iters;
  kopts.n_threads = g.threads;
  auto [model, report, precond] =
      fit_krr(data, y, spec, mu, opts.rank,
              RunConfig::until_rank(std::max<Eigen::Index>(1, opts.rank),
                                    opts.block, g.seed),
              opts.tol, kopts);
  std::cout << "pcg iterations " << report.iterations << ", converged "
            << (report.converged ? "yes" : "no");
  if (!report.relative_residuals.empty()) {
    std::cout << ", final relative residual " << report.relative_residuals.back();
  }
  std::cout << "\n";

  // Model file: the preconditioner factor and pivots, plus the coefficient
  // sidecar that prediction needs.
  write_rpcf(out, precond);
  KrrModelMeta meta{spec.kind, spec.bandwidth, mu, model.target_mean,
                    model.coefficients};
  write_krr_sidecar(out + ".meta.csv", meta);

  if (!opts.test_points.empty()) {
    DataMatrix queries = read_points_csv(opts.test_points, opts.header);
    Eigen::VectorXd preds = predict(model, queries, 1024, g.threads);
    if (!opts.pred_out.empty()) write_vector_csv(opts.pred_out, preds);
    if (!opts.test_targets.empty()) {
      Eigen::VectorXd actual = read_vector_csv(opts.test_targets, opts.header);
      std::cout << "test MAE " << mean_absolute_error(preds, actual) << "\n";
    }
  }
  if (!report.converged) return kExitNumerical;
  return kExitOk;
}

struct BoundsOpts {
  std::string spectrum_file;
  Eigen::Index r = 1;
  double eps = 0.5;
  Eigen::Index block = 1;
  bool drvw = false;
  Eigen::Index trajectory = 0;
};

int cmd_bounds(const GlobalOpts& g, const BoundsOpts& opts) {
  const std::string out = require_out(g);
  if (opts.spectrum_file.empty()) {
    throw CLI::ValidationError("--spectrum is required");
  }
  Eigen::VectorXd spectrum = read_vector_csv(opts.spectrum_file);
  BoundQuery q;
  q.target_rank = opts.r;
  q.accuracy = opts.eps;
  q.block_size = opts.block;
  q.spectrum = spectrum;
  BoundReport simple = sufficient_pivots_simple(q);
  BoundReport block = sufficient_proposals_block(q);

  std::ofstream os = rpchol::detail::open_out(out);
  os << "metric,value\n";
  os << "eta," << rpchol::detail::format_double(simple.eta) << "\n";
  os << "simple_pivots," << rpchol::detail::format_double(simple.sufficient_count) << "\n";
  os << "block_proposals," << rpchol::detail::format_double(block.sufficient_count) << "\n";
  if (opts.drvw) {
    BoundReport drvw = drvw_sufficient_rounds(q);
    os << "drvw_rounds," << rpchol::detail::format_double(drvw.sufficient_count) << "\n";
  }
  if (simple.log_floored) os << "log_floored,1\n";
  if (simple.exact_rank_regime) os << "exact_rank_regime,1\n";
  os.close();

  if (opts.trajectory > 0) {
    const double gamma = q.head_sum();
    const double beta = q.tail_sum();
    auto traj = worst_case_recursion(gamma, beta, opts.r, opts.block, opts.trajectory);
    std::ofstream ts = rpchol::detail::open_out(out + ".trajectory.csv");
    ts << "round,alpha\n";
    for (std::size_t t = 0; t < traj.size(); ++t) {
      ts << t << ',' << rpchol::detail::format_double(traj[t]) << "\n";
    }
  }
  std::cout << "eta " << simple.eta << ", sufficient pivots "
            << simple.sufficient_count << ", sufficient proposals "
            << block.sufficient_count << "\n";
  return kExitOk;
}

struct BenchOpts {
  std::string blocks = "1,4,16,64,256";
};

int cmd_bench_columns(const GlobalOpts& g, const DatasetOpts& d, const KernelOpts& k,
                      const BenchOpts& opts) {
  const std::string out = require_out(g);
  DataMatrix data = generate_dataset(d.spec(g.seed));
  KernelSpec spec = k.resolve(data, g.seed);
  std::vector<Eigen::Index> sizes;
  std::stringstream ss(opts.blocks);
  std::string token;
  while (std::getline(ss, token, ',')) {
    sizes.push_back(static_cast<Eigen::Index>(std::stol(token)));
  }
  auto rows = bench_column_throughput(data, spec, sizes, g.seed, g.threads);
  write_throughput_csv(out, rows);
  for (const auto& row : rows) {
    std::cout << "b=" << row.block_size << " mode="
              << (row.mode == DistanceMode::Direct ? "direct" : "gram")
              << " columns/s=" << row.columns_per_sec << "\n";
  }
  return kExitOk;
}

struct ExperimentOpts {
  std::string methods = "simple,block,accelerated";
  Eigen::Index rank = 100;
  Eigen::Index block = 20;
  Eigen::Index trials = 3;
  Eigen::Index materialize_threshold = Eigen::Index{1} << 14;
  bool no_warmup = false;
};

int cmd_experiment(const GlobalOpts& g, const DatasetOpts& d, const KernelOpts& k,
                   const ExperimentOpts& opts) {
  const std::string out_dir = require_out(g);
  std::filesystem::create_directories(out_dir);
  ExperimentConfig cfg;
  cfg.dataset = d.spec(g.seed);
  // Resolve the bandwidth against the dataset (median heuristic or literal).
  DataMatrix preview = generate_dataset(cfg.dataset);
  cfg.kernel = k.resolve(preview, g.seed);
  std::stringstream ss(opts.methods);
  std::string token;
  while (std::getline(ss, token, ',')) cfg.methods.push_back(method_from_name(token));
  cfg.rank = opts.rank;
  cfg.block_size = opts.block;
  cfg.trials = opts.trials;
  cfg.seed = g.seed;
  cfg.materialize_threshold = opts.materialize_threshold;
  cfg.n_threads = g.threads;
  cfg.warmup = !opts.no_warmup;
  ExperimentReport report = run_experiment(cfg);
  write_experiment_csv(out_dir + "/report.csv", report);
  plot_data_export({report}, out_dir);
  for (const auto& agg : report.aggregates) {
    std::cout << method_name(agg.method) << ": mean error " << agg.mean_error
              << " (+- " << agg.std_error << "), mean wall " << agg.mean_wall_ms
              << " ms, acceptance " << agg.mean_acceptance << "\n";
  }
  bool any_failed = false;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) {
      std::cerr << method_name(row.method) << " trial " << row.trial
                << " failed: " << row.error << "\n";
      any_failed = true;
    }
  }
  return any_failed ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomly pivoted Cholesky/QR low-rank approximation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "read options from a key=value file");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output path (file or directory, per subcommand)");
  app.add_option("--threads", g.threads, "worker threads for blocked kernels and trials");

  DatasetOpts dataset;
  KernelOpts kernel;
  ApproxOpts approx;
  KrrOpts krr;
  BoundsOpts bounds;
  BenchOpts bench;
  ExperimentOpts experiment;

  CLI::App* c_gen = app.add_subcommand("gen-data", "generate a synthetic point set");
  dataset.add_flags(c_gen);

  CLI::App* c_approx = app.add_subcommand("approx", "run a low-rank approximation");
  dataset.add_flags(c_approx);
  kernel.add_flags(c_approx);
  c_approx->add_option("--method", approx.method,
                       "simple|block|accelerated|accelerated-lowmem|rbrp|rpqr|accelerated-rpqr");
  c_approx->add_option("--rank", approx.rank, "target rank (until-rank mode)");
  c_approx->add_option("--rounds", approx.rounds, "fixed number of rounds");
  c_approx->add_option("--block", approx.block, "block size");
  c_approx->add_option("--stop-tol", approx.stop_tol, "relative trace error early exit");
  c_approx->add_option("--matrix", approx.matrix_file, "dense matrix input (.rpqf)");
  c_approx->add_option("--mode", approx.distance_mode, "distance mode: auto|direct|gram");

  CLI::App* c_krr = app.add_subcommand("krr", "kernel ridge regression via PCG");
  kernel.add_flags(c_krr);
  c_krr->add_option("--train", krr.train, "training points CSV");
  c_krr->add_option("--targets", krr.targets, "training targets CSV");
  c_krr->add_flag("--header", krr.header, "input CSVs carry one header line");
  c_krr->add_option("--mu", krr.mu, "regularization; suffix N scales by the point count");
  c_krr->add_option("--rank", krr.rank, "preconditioner rank");
  c_krr->add_option("--block", krr.block, "preconditioner block size");
  c_krr->add_option("--tol", krr.tol, "PCG relative residual tolerance");
  c_krr->add_option("--max-iters", krr.max_iters, "PCG iteration cap");
  c_krr->add_option("--test-points", krr.test_points, "held-out points CSV");
  c_krr->add_option("--test-targets", krr.test_targets, "held-out targets CSV");
  c_krr->add_option("--pred-out", krr.pred_out, "write held-out predictions CSV");

  CLI::App* c_bounds = app.add_subcommand("bounds", "evaluate sufficient-pivot bounds");
  c_bounds->add_option("--spectrum", bounds.spectrum_file, "eigenvalue CSV, one per line");
  c_bounds->add_option("--r", bounds.r, "target rank r");
  c_bounds->add_option("--eps", bounds.eps, "accuracy epsilon");
  c_bounds->add_option("--block", bounds.block, "block size b");
  c_bounds->add_flag("--drvw", bounds.drvw, "also evaluate the large-block round bound");
  c_bounds->add_option("--trajectory", bounds.trajectory,
                       "emit the worst-case recursion for this many rounds");

  CLI::App* c_bench = app.add_subcommand("bench-columns", "column-generation throughput");
  dataset.add_flags(c_bench);
  kernel.add_flags(c_bench);
  c_bench->add_option("--blocks", bench.blocks, "comma-separated block sizes");

  CLI::App* c_exp = app.add_subcommand("experiment", "compare methods on one dataset");
  dataset.add_flags(c_exp);
  kernel.add_flags(c_exp);
  c_exp->add_option("--methods", experiment.methods, "comma-separated method list");
  c_exp->add_option("--rank", experiment.rank, "target rank");
  c_exp->add_option("--block", experiment.block, "block size");
  c_exp->add_option("--trials", experiment.trials, "trials per method");
  c_exp->add_option("--materialize-threshold", experiment.materialize_threshold,
                    "max N for one-time kernel materialization");
  c_exp->add_flag("--no-warmup", experiment.no_warmup, "skip the untimed warmup run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(c_gen)) return cmd_gen_data(g, dataset);
    if (app.got_subcommand(c_approx)) return cmd_approx(g, dataset, kernel, approx);
    if (app.got_subcommand(c_krr)) return cmd_krr(g, kernel, krr);
    if (app.got_subcommand(c_bounds)) return cmd_bounds(g, bounds);
    if (app.got_subcommand(c_bench)) return cmd_bench_columns(g, dataset, kernel, bench);
    if (app.got_subcommand(c_exp)) return cmd_experiment(g, dataset, kernel, experiment);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
