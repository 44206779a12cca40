/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_KRR_HPP
#define RPCHOL_KRR_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rpchol/oracle.hpp"
#include "rpchol/parallel.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

/// Low-rank preconditioner P = F F^T + mu I applied through the Woodbury
/// identity: P^{-1} v = (v - F (F^T F + mu I)^{-1} F^T v) / mu.
class Preconditioner {
 public:
  Preconditioner(Eigen::MatrixXd factor, double mu)
      : f_(std::move(factor)), mu_(mu) {
    if (!(mu_ > 0.0)) throw std::invalid_argument("Preconditioner: mu must be > 0");
    if (!f_.allFinite()) throw std::invalid_argument("Preconditioner: non-finite factor");
    const Eigen::Index k = f_.cols();
    if (k > 0) {
      Eigen::MatrixXd core = f_.transpose() * f_;
      core.diagonal().array() += mu_;
      core_.compute(core);
      if (core_.info() != Eigen::Success) {
        throw std::runtime_error("Preconditioner: core factorization failed");
      }
    }
  }

  /// Identity solve (P = I); used for plain unpreconditioned CG.
  static Preconditioner identity() {
    return Preconditioner(Eigen::MatrixXd(0, 0), 1.0);
  }

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const {
    if (f_.cols() == 0) return v / mu_;
    Eigen::VectorXd core_sol = core_.solve(f_.transpose() * v);
    return (v - f_ * core_sol) / mu_;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (f_.cols() == 0) return mu_ * v;
    return f_ * (f_.transpose() * v) + mu_ * v;
  }

  double mu() const noexcept { return mu_; }
  Eigen::Index rank() const noexcept { return f_.cols(); }

 private:
  Eigen::MatrixXd f_;
  double mu_;
  Eigen::LLT<Eigen::MatrixXd> core_;
};

inline Preconditioner build_preconditioner(Eigen::MatrixXd factor, double mu) {
  return Preconditioner(std::move(factor), mu);
}

struct PcgReport {
  Eigen::Index iterations = 0;
  std::vector<double> relative_residuals;       // ||(A + mu I) beta - y|| / ||y||
  std::vector<double> relative_residuals_unreg; // ||A beta - y|| / ||y||
  bool converged = false;
};

/// Textbook preconditioned conjugate gradient on (A + mu I) beta = y.  The
/// matvec argument must apply the full regularized operator.  Convergence is
/// declared on the regularized residual; the unregularized residual is logged
/// alongside when mu_for_logging is supplied.
inline std::pair<Eigen::VectorXd, PcgReport> pcg_solve(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
    const Preconditioner& precond, const Eigen::VectorXd& y, double tol,
    Eigen::Index max_iters, double mu_for_logging = 0.0) {
  if (!(tol > 0.0)) throw std::invalid_argument("pcg_solve: tol must be > 0");
  const double norm_y = y.norm();
  if (!(norm_y > 0.0)) throw std::invalid_argument("pcg_solve: y must be nonzero");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(y.size());
  Eigen::VectorXd r = y;
  Eigen::VectorXd z = precond.apply_inverse(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  PcgReport report;
  for (Eigen::Index it = 0; it < max_iters; ++it) {
    Eigen::VectorXd ap = matvec(p);
    const double denom = p.dot(ap);
    if (!(denom > 0.0)) break;  // loss of positive definiteness in floating point
    const double alpha = rz / denom;
    x += alpha * p;
    r -= alpha * ap;
    report.iterations = it + 1;
    const double rel = r.norm() / norm_y;
    report.relative_residuals.push_back(rel);
    report.relative_residuals_unreg.push_back((r + mu_for_logging * x).norm() /
                                              norm_y);
    if (rel < tol) {
      report.converged = true;
      break;
    }
    z = precond.apply_inverse(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return {std::move(x), std::move(report)};
}

struct KrrModel {
  DataMatrix training_points;
  KernelSpec kernel;
  double regularization = 0.0;
  Eigen::VectorXd coefficients;
  double target_mean = 0.0;
};

struct KrrOptions {
  Eigen::Index max_iters = 500;
  Eigen::Index matvec_row_block = 1024;
  // Kernel matrices at or below this dimension are generated once and reused
  // across iterations; larger systems use on-the-fly blocked matvecs.
  Eigen::Index materialize_threshold = 8192;
  int n_threads = 1;
};

/// Blocked kernel matvec v -> A v computed in row panels; never forms A.
inline Eigen::VectorXd kernel_matvec(const DataMatrix& data,
                                     const KernelSpec& spec, DistanceMode mode,
                                     const Eigen::VectorXd& v,
                                     Eigen::Index row_block, int n_threads) {
  const Eigen::Index n = data.n_points();
  if (v.size() != n) throw std::invalid_argument("kernel_matvec: size mismatch");
  if (row_block < 1) row_block = n;
  Eigen::VectorXd out(n);
  IndexList cols = all_indices(n);
  const Eigen::Index n_blocks = (n + row_block - 1) / row_block;
  parallel_for(n_blocks, n_threads, [&](std::ptrdiff_t blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * row_block;
    const Eigen::Index height = std::min(row_block, n - r0);
    IndexList rows(static_cast<std::size_t>(height));
    std::iota(rows.begin(), rows.end(), r0);
    Eigen::MatrixXd panel = kernel_cross_block(spec, data, rows, data, cols, mode);
    out.segment(r0, height).noalias() = panel * v;
  });
  return out;
}

struct KrrFitResult {
  KrrModel model;
  PcgReport report;
  LowRankApprox preconditioner;  // factor and pivots behind the solve
};

/// Fits kernel ridge regression by PCG with an accelerated-RPCholesky
/// low-rank preconditioner.  Targets are centered by their mean; the model
/// stores the offset.
inline KrrFitResult fit_krr(
    const DataMatrix& data, const Eigen::VectorXd& targets,
    const KernelSpec& spec, double mu, Eigen::Index precond_rank,
    const RunConfig& config, double tol, const KrrOptions& opts = {}) {
  const Eigen::Index n = data.n_points();
  if (targets.size() != n) throw std::invalid_argument("fit_krr: targets size mismatch");
  if (!(mu > 0.0)) throw std::invalid_argument("fit_krr: mu must be > 0");
  const double mean = targets.mean();
  Eigen::VectorXd y = targets.array() - mean;

  const DistanceMode mode = default_distance_mode(spec.kind);
  KernelOracle oracle(data, spec, mode, opts.n_threads);

  LowRankApprox low_rank;
  low_rank.factor.resize(n, 0);
  Preconditioner precond = Preconditioner::identity();
  if (precond_rank > 0) {
    RunConfig cfg = config;
    cfg.mode = RunConfig::Mode::UntilRank;
    cfg.target_rank = std::min(precond_rank, n);
    low_rank = accelerated_rpcholesky(oracle, cfg).approx;
    precond = Preconditioner(low_rank.factor, mu);
  }

  KrrModel model{data, spec, mu, Eigen::VectorXd(), mean};
  PcgReport report;
  if (y.norm() == 0.0) {
    // Constant targets: centering absorbs everything.
    model.coefficients = Eigen::VectorXd::Zero(n);
    report.converged = true;
    return {std::move(model), std::move(report), std::move(low_rank)};
  }

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> matvec;
  Eigen::MatrixXd dense_a;
  if (n <= opts.materialize_threshold) {
    IndexList idx = all_indices(n);
    dense_a = kernel_cross_block(spec, data, idx, data, idx, mode);
    matvec = [&dense_a, mu](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(dense_a * v + mu * v);
    };
  } else {
    matvec = [&data, &spec, mode, mu, &opts](const Eigen::VectorXd& v) {
      Eigen::VectorXd av = kernel_matvec(data, spec, mode, v,
                                         opts.matvec_row_block, opts.n_threads);
      return Eigen::VectorXd(av + mu * v);
    };
  }
  auto [beta, pcg_report] = pcg_solve(matvec, precond, y, tol, opts.max_iters, mu);
  model.coefficients = std::move(beta);
  return {std::move(model), std::move(pcg_report), std::move(low_rank)};
}

/// f(x) = sum_i beta_i kappa(x_i, x) + target mean, in blocked kernel panels.
inline Eigen::VectorXd predict(const KrrModel& model, const DataMatrix& query,
                               Eigen::Index row_block = 1024, int n_threads = 1) {
  if (query.dim() != model.training_points.dim()) {
    throw std::invalid_argument("predict: query dimension mismatch");
  }
  const Eigen::Index q = query.n_points();
  const DistanceMode mode = default_distance_mode(model.kernel.kind);
  Eigen::VectorXd out(q);
  IndexList train_cols = all_indices(model.training_points.n_points());
  if (row_block < 1) row_block = q;
  const Eigen::Index n_blocks = (q + row_block - 1) / row_block;
  parallel_for(n_blocks, n_threads, [&](std::ptrdiff_t blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * row_block;
    const Eigen::Index height = std::min(row_block, q - r0);
    IndexList rows(static_cast<std::size_t>(height));
    std::iota(rows.begin(), rows.end(), r0);
    Eigen::MatrixXd panel = kernel_cross_block(model.kernel, query, rows,
                                               model.training_points,
                                               train_cols, mode);
    out.segment(r0, height).noalias() = panel * model.coefficients;
  });
  out.array() += model.target_mean;
  return out;
}

inline double mean_absolute_error(const Eigen::VectorXd& pred,
                                  const Eigen::VectorXd& actual) {
  if (pred.size() != actual.size()) {
    throw std::invalid_argument("mean_absolute_error: length mismatch");
  }
  if (pred.size() == 0) throw std::invalid_argument("mean_absolute_error: empty vectors");
  return (pred - actual).cwiseAbs().mean();
}

/// Inverse pairwise distances 1/||r_i - r_j|| for i < j in lexicographic
/// order; length n_atoms (n_atoms - 1) / 2.
inline Eigen::VectorXd inverse_distance_features(
    const Eigen::Ref<const Eigen::MatrixXd>& atom_positions) {
  const Eigen::Index n_atoms = atom_positions.rows();
  if (n_atoms < 2) throw std::invalid_argument("inverse_distance_features: need >= 2 atoms");
  if (atom_positions.cols() != 3) {
    throw std::invalid_argument("inverse_distance_features: positions must be n x 3");
  }
  Eigen::VectorXd features(n_atoms * (n_atoms - 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n_atoms; ++i) {
    for (Eigen::Index j = i + 1; j < n_atoms; ++j) {
      const double dist = (atom_positions.row(i) - atom_positions.row(j)).norm();
      if (!(dist > 0.0)) {
        throw std::invalid_argument("inverse_distance_features: singular feature (coincident atoms)");
      }
      features[idx++] = 1.0 / dist;
    }
  }
  return features;
}

/// Featurizes a batch of molecular frames: each input row holds n_atoms
/// flattened 3-vectors (x1, y1, z1, x2, ...) and becomes one row of inverse
/// pairwise distances.
inline Eigen::MatrixXd frames_to_features(const Eigen::MatrixXd& frames,
                                          Eigen::Index n_atoms) {
  if (n_atoms < 2) throw std::invalid_argument("frames_to_features: need >= 2 atoms");
  if (frames.cols() != 3 * n_atoms) {
    throw std::invalid_argument("frames_to_features: expected 3 * n_atoms columns");
  }
  const Eigen::Index n_features = n_atoms * (n_atoms - 1) / 2;
  Eigen::MatrixXd out(frames.rows(), n_features);
  Eigen::MatrixXd positions(n_atoms, 3);
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    for (Eigen::Index a = 0; a < n_atoms; ++a) {
      for (Eigen::Index c = 0; c < 3; ++c) {
        positions(a, c) = frames(i, 3 * a + c);
      }
    }
    out.row(i) = inverse_distance_features(positions).transpose();
  }
  return out;
}

struct StandardizedFeatures {
  Eigen::MatrixXd features;      // zero-variance columns removed
  IndexList dropped;             // indices of removed columns
  Eigen::VectorXd mean;          // per kept column
  Eigen::VectorXd std_dev;       // population std, per kept column
};

/// Dataset-level standardization pass: subtract the mean and divide by the
/// population standard deviation per feature.  Zero-variance features are
/// dropped and reported.
inline StandardizedFeatures standardize_features(const Eigen::MatrixXd& raw) {
  const Eigen::Index n = raw.rows();
  if (n < 1) throw std::invalid_argument("standardize_features: empty input");
  StandardizedFeatures out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    const double var = (raw.col(j).array() - mean).square().sum() / static_cast<double>(n);
    if (var > 0.0) {
      kept.push_back(j);
    } else {
      out.dropped.push_back(j);
    }
  }
  out.features.resize(n, static_cast<Eigen::Index>(kept.size()));
  out.mean.resize(static_cast<Eigen::Index>(kept.size()));
  out.std_dev.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const Eigen::Index j = kept[c];
    const double mean = raw.col(j).mean();
    const double var = (raw.col(j).array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    out.mean[static_cast<Eigen::Index>(c)] = mean;
    out.std_dev[static_cast<Eigen::Index>(c)] = sd;
    out.features.col(static_cast<Eigen::Index>(c)) = (raw.col(j).array() - mean) / sd;
  }
  return out;
}

}  // namespace rpchol

#endif  // RPCHOL_KRR_HPP
