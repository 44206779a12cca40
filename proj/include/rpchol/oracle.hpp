/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_ORACLE_HPP
#define RPCHOL_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rpchol/data_matrix.hpp"
#include "rpchol/kernels.hpp"
#include "rpchol/parallel.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

using IndexList = std::vector<Eigen::Index>;
using IndexSpan = std::span<const Eigen::Index>;

/// How squared Euclidean distance blocks are generated.  GramTrick expands
/// ||x - y||^2 into squared norms plus one inner-product matrix product; it is
/// only valid for kernels of the form phi(||x - x'||_2).
enum class DistanceMode { Direct, GramTrick };

inline DistanceMode default_distance_mode(KernelKind kind) noexcept {
  return is_l2_translation_invariant(kind) ? DistanceMode::GramTrick
                                           : DistanceMode::Direct;
}

inline void check_indices(IndexSpan idx, Eigen::Index n, const char* what) {
  for (Eigen::Index i : idx) {
    if (i < 0 || i >= n) {
      throw std::out_of_range(std::string(what) + ": index out of range");
    }
  }
}

inline IndexList all_indices(Eigen::Index n) {
  IndexList idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return idx;
}

namespace detail {

inline Eigen::MatrixXd gather_points(const Eigen::MatrixXd& pts, IndexSpan idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), pts.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = pts.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Squared distances via norms + one matrix-matrix product, clamped at zero.
/// Pairs with equal row/column index are pinned to exactly zero, so the
/// diagonal of a kernel block never suffers from cancellation.
inline Eigen::MatrixXd sq_dist_gram(const Eigen::MatrixXd& xr,
                                    const Eigen::MatrixXd& xc,
                                    const Eigen::VectorXd& sqn_r,
                                    const Eigen::VectorXd& sqn_c,
                                    IndexSpan rows, IndexSpan cols) {
  Eigen::MatrixXd d = -2.0 * (xr * xc.transpose());
  d.colwise() += sqn_r;
  d.rowwise() += sqn_c.transpose();
  d = d.cwiseMax(0.0);
  std::unordered_map<Eigen::Index, std::vector<Eigen::Index>> col_pos;
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(cols.size()); ++b) {
    col_pos[cols[static_cast<std::size_t>(b)]].push_back(b);
  }
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(rows.size()); ++a) {
    auto it = col_pos.find(rows[static_cast<std::size_t>(a)]);
    if (it == col_pos.end()) continue;
    for (Eigen::Index b : it->second) d(a, b) = 0.0;
  }
  return d;
}

inline Eigen::MatrixXd sq_dist_direct(const Eigen::MatrixXd& xr,
                                      const Eigen::MatrixXd& xc) {
  Eigen::MatrixXd d(xr.rows(), xc.rows());
  for (Eigen::Index b = 0; b < xc.rows(); ++b) {
    for (Eigen::Index a = 0; a < xr.rows(); ++a) {
      d(a, b) = (xr.row(a) - xc.row(b)).squaredNorm();
    }
  }
  return d;
}

inline Eigen::MatrixXd l1_dist_direct(const Eigen::MatrixXd& xr,
                                      const Eigen::MatrixXd& xc) {
  Eigen::MatrixXd d(xr.rows(), xc.rows());
  for (Eigen::Index b = 0; b < xc.rows(); ++b) {
    for (Eigen::Index a = 0; a < xr.rows(); ++a) {
      d(a, b) = (xr.row(a) - xc.row(b)).cwiseAbs().sum();
    }
  }
  return d;
}

}  // namespace detail

/// Squared Euclidean distances between selected rows and columns of a point
/// set.  All outputs are >= 0 in either mode.
inline Eigen::MatrixXd squared_distance_block(const DataMatrix& data,
                                              IndexSpan rows, IndexSpan cols,
                                              DistanceMode mode) {
  const Eigen::MatrixXd& pts = data.points();
  check_indices(rows, pts.rows(), "squared_distance_block rows");
  check_indices(cols, pts.rows(), "squared_distance_block cols");
  Eigen::MatrixXd xr = detail::gather_points(pts, rows);
  Eigen::MatrixXd xc = detail::gather_points(pts, cols);
  if (mode == DistanceMode::Direct) {
    return detail::sq_dist_direct(xr, xc);
  }
  Eigen::VectorXd sqn_r = xr.rowwise().squaredNorm();
  Eigen::VectorXd sqn_c = xc.rowwise().squaredNorm();
  return detail::sq_dist_gram(xr, xc, sqn_r, sqn_c, rows, cols);
}

/// Kernel block kappa(a_i, b_j) between two point sets.  Used for both the
/// square kernel oracle (a == b) and cross blocks at prediction time.
inline Eigen::MatrixXd kernel_cross_block(const KernelSpec& spec,
                                          const DataMatrix& a, IndexSpan rows,
                                          const DataMatrix& b, IndexSpan cols,
                                          DistanceMode mode) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("kernel_cross_block: dimension mismatch");
  }
  if (spec.kind == KernelKind::L1Laplace) {
    Eigen::MatrixXd xr = detail::gather_points(a.points(), rows);
    Eigen::MatrixXd xc = detail::gather_points(b.points(), cols);
    Eigen::MatrixXd d = detail::l1_dist_direct(xr, xc);
    return (-d / spec.bandwidth).array().exp().matrix();
  }
  const bool same_set = (&a == &b);
  Eigen::MatrixXd d =
      same_set ? squared_distance_block(a, rows, cols, mode)
               : [&] {
                   check_indices(rows, a.n_points(), "kernel_cross_block rows");
                   check_indices(cols, b.n_points(), "kernel_cross_block cols");
                   Eigen::MatrixXd xr = detail::gather_points(a.points(), rows);
                   Eigen::MatrixXd xc = detail::gather_points(b.points(), cols);
                   if (mode == DistanceMode::Direct) {
                     return detail::sq_dist_direct(xr, xc);
                   }
                   Eigen::VectorXd sqn_r = xr.rowwise().squaredNorm();
                   Eigen::VectorXd sqn_c = xc.rowwise().squaredNorm();
                   Eigen::MatrixXd g = -2.0 * (xr * xc.transpose());
                   g.colwise() += sqn_r;
                   g.rowwise() += sqn_c.transpose();
                   return Eigen::MatrixXd(g.cwiseMax(0.0));
                 }();
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      d(i, j) = kernel_from_sq_dist(spec, d(i, j));
    }
  }
  return d;
}

/// Abstract psd matrix exposed through the submatrix access model.
/// Implementations are immutable after construction and safe to share across
/// workers; block extraction yields bit-identical results for any worker
/// count.
class PsdOracle {
 public:
  virtual ~PsdOracle() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::VectorXd diag() const = 0;
  virtual Eigen::MatrixXd submatrix(IndexSpan rows, IndexSpan cols) const = 0;

  /// Full-height column panel A(:, cols).
  virtual Eigen::MatrixXd columns(IndexSpan cols) const {
    IndexList rows = all_indices(dimension());
    return submatrix(rows, cols);
  }
};

/// Oracle over an explicitly stored dense psd matrix (column-major reals).
class DenseOracle final : public PsdOracle {
 public:
  explicit DenseOracle(Eigen::MatrixXd matrix) : a_(std::move(matrix)) {
    if (a_.rows() != a_.cols()) {
      throw std::invalid_argument("DenseOracle: matrix must be square");
    }
    if (!a_.allFinite()) {
      throw std::invalid_argument("DenseOracle: non-finite entry");
    }
    if ((a_.diagonal().array() < 0.0).any()) {
      throw std::invalid_argument("DenseOracle: negative diagonal entry");
    }
  }

  Eigen::Index dimension() const override { return a_.rows(); }
  Eigen::VectorXd diag() const override { return a_.diagonal(); }

  Eigen::MatrixXd submatrix(IndexSpan rows, IndexSpan cols) const override {
    check_indices(rows, a_.rows(), "DenseOracle rows");
    check_indices(cols, a_.cols(), "DenseOracle cols");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const Eigen::Index c = cols[static_cast<std::size_t>(j)];
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out(i, j) = a_(rows[static_cast<std::size_t>(i)], c);
      }
    }
    return out;
  }

  Eigen::MatrixXd columns(IndexSpan cols) const override {
    check_indices(cols, a_.cols(), "DenseOracle cols");
    Eigen::MatrixXd out(a_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out.col(j) = a_.col(cols[static_cast<std::size_t>(j)]);
    }
    return out;
  }

  const Eigen::MatrixXd& matrix() const noexcept { return a_; }

 private:
  Eigen::MatrixXd a_;
};

/// Implicit kernel matrix oracle.  Stores only the point set and regenerates
/// blocks on demand; the full matrix is never materialized here.
class KernelOracle final : public PsdOracle {
 public:
  KernelOracle(DataMatrix data, KernelSpec spec)
      : KernelOracle(std::move(data), spec, default_distance_mode(spec.kind)) {}

  KernelOracle(DataMatrix data, KernelSpec spec, DistanceMode mode,
               int n_threads = 1)
      : data_(std::move(data)), spec_(spec), mode_(mode),
        n_threads_(n_threads),
        sq_norms_(data_.points().rowwise().squaredNorm()) {
    if (mode_ == DistanceMode::GramTrick &&
        !is_l2_translation_invariant(spec_.kind)) {
      throw std::invalid_argument(
          "KernelOracle: GramTrick requires an l2 translation-invariant kernel");
    }
  }

  Eigen::Index dimension() const override { return data_.n_points(); }

  // kappa(x, x) = 1 for all supported kernels.
  Eigen::VectorXd diag() const override {
    return Eigen::VectorXd::Ones(data_.n_points());
  }

  Eigen::MatrixXd submatrix(IndexSpan rows, IndexSpan cols) const override {
    check_indices(rows, data_.n_points(), "KernelOracle rows");
    check_indices(cols, data_.n_points(), "KernelOracle cols");
    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd out(nr, nc);
    // Fixed-width column panels keep the output independent of thread count.
    constexpr Eigen::Index kPanel = 256;
    const Eigen::Index n_panels = (nc + kPanel - 1) / kPanel;
    Eigen::MatrixXd xr = detail::gather_points(data_.points(), rows);
    Eigen::VectorXd sqn_r(nr);
    for (Eigen::Index i = 0; i < nr; ++i) {
      sqn_r[i] = sq_norms_[rows[static_cast<std::size_t>(i)]];
    }
    parallel_for(n_panels, n_threads_, [&](std::ptrdiff_t p) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(p) * kPanel;
      const Eigen::Index width = std::min(kPanel, nc - c0);
      IndexSpan panel_cols = cols.subspan(static_cast<std::size_t>(c0),
                                          static_cast<std::size_t>(width));
      out.middleCols(c0, width) = panel_block(xr, sqn_r, rows, panel_cols);
    });
    return out;
  }

  const DataMatrix& data() const noexcept { return data_; }
  const KernelSpec& kernel() const noexcept { return spec_; }
  DistanceMode distance_mode() const noexcept { return mode_; }

 private:
  Eigen::MatrixXd panel_block(const Eigen::MatrixXd& xr,
                              const Eigen::VectorXd& sqn_r, IndexSpan rows,
                              IndexSpan cols) const {
    Eigen::MatrixXd xc = detail::gather_points(data_.points(), cols);
    Eigen::MatrixXd d;
    if (spec_.kind == KernelKind::L1Laplace) {
      d = detail::l1_dist_direct(xr, xc);
      return (-d / spec_.bandwidth).array().exp().matrix();
    }
    if (mode_ == DistanceMode::Direct) {
      d = detail::sq_dist_direct(xr, xc);
    } else {
      Eigen::VectorXd sqn_c(static_cast<Eigen::Index>(cols.size()));
      for (Eigen::Index j = 0; j < sqn_c.size(); ++j) {
        sqn_c[j] = sq_norms_[cols[static_cast<std::size_t>(j)]];
      }
      d = detail::sq_dist_gram(xr, xc, sqn_r, sqn_c, rows, cols);
    }
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      for (Eigen::Index i = 0; i < d.rows(); ++i) {
        d(i, j) = kernel_from_sq_dist(spec_, d(i, j));
      }
    }
    return d;
  }

  DataMatrix data_;
  KernelSpec spec_;
  DistanceMode mode_;
  int n_threads_;
  Eigen::VectorXd sq_norms_;
};

/// Median pairwise Euclidean distance over a uniform subsample without
/// replacement.  Deterministic given the seed.
inline double median_bandwidth(const DataMatrix& data, Eigen::Index sample_size,
                               std::uint64_t seed) {
  if (data.n_points() < 2) {
    throw std::invalid_argument("median_bandwidth: need at least 2 points");
  }
  if (sample_size < 2) {
    throw std::invalid_argument("median_bandwidth: sample_size must be >= 2");
  }
  SplitMix64 rng(seed);
  const Eigen::Index m = std::min(sample_size, data.n_points());
  IndexList sel = sample_without_replacement(data.n_points(), m, rng);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  const Eigen::MatrixXd& pts = data.points();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      dists.push_back((pts.row(sel[static_cast<std::size_t>(i)]) -
                       pts.row(sel[static_cast<std::size_t>(j)]))
                          .norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  const double median = (n % 2 == 1)
                            ? dists[n / 2]
                            : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
  if (!(median > 0.0)) {
    throw std::runtime_error("median_bandwidth: degenerate bandwidth (median distance is 0)");
  }
  return median;
}

}  // namespace rpchol

#endif  // RPCHOL_ORACLE_HPP
