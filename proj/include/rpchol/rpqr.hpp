/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_RPQR_HPP
#define RPCHOL_RPQR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "rpchol/rpcholesky.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

/// Low-rank approximation B ~ Q F^T with orthonormal Q.
struct QrApprox {
  Eigen::MatrixXd q_factor;  // M x k, orthonormal columns
  Eigen::MatrixXd f_factor;  // N x k
  IndexList pivots;          // ordered, distinct

  Eigen::Index rank() const noexcept { return q_factor.cols(); }
};

struct QrResult {
  QrApprox approx;
  PivotTrace trace;
  Eigen::VectorXd residual_col_norms;  // squared, tracked
};

/// Randomly pivoted QR: pivots sampled proportional to residual squared
/// column norms, orthogonalized one at a time.
inline QrResult rp_qr(const Eigen::MatrixXd& b_mat, Eigen::Index k,
                      std::uint64_t seed) {
  const Eigen::Index m_rows = b_mat.rows();
  const Eigen::Index n_cols = b_mat.cols();
  if (k < 1 || k > std::min(m_rows, n_cols)) {
    throw std::invalid_argument("rp_qr: need 1 <= k <= min(M, N)");
  }
  Eigen::VectorXd d = b_mat.colwise().squaredNorm();
  if (!(d.sum() > 0.0)) throw std::invalid_argument("rp_qr: matrix must be nonzero");

  QrResult res;
  res.approx.q_factor.resize(m_rows, k);
  res.approx.f_factor.resize(n_cols, k);
  Eigen::Index kcur = 0;
  SplitMix64 rng(seed);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(d.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    const Eigen::Index s = sample_discrete(cumulative_sums(d), rng);
    Eigen::VectorXd g = b_mat.col(s);
    if (kcur > 0) {
      g.noalias() -= res.approx.q_factor.leftCols(kcur) *
                     res.approx.f_factor.row(s).head(kcur).transpose();
    }
    const double norm_g = g.norm();
    if (!(norm_g > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    res.approx.q_factor.col(kcur) = g / norm_g;
    res.approx.f_factor.col(kcur).noalias() =
        b_mat.transpose() * res.approx.q_factor.col(kcur);
    d -= res.approx.f_factor.col(kcur).cwiseAbs2();
    d = d.cwiseMax(0.0);
    res.approx.pivots.push_back(s);
    res.trace.rounds.push_back({{s}, {s}, {}});
    ++kcur;
  }
  res.approx.q_factor.conservativeResize(m_rows, kcur);
  res.approx.f_factor.conservativeResize(n_cols, kcur);
  res.residual_col_norms = d;
  return res;
}

namespace detail {

struct OrthResult {
  Eigen::MatrixXd q;             // orthonormal columns
  std::vector<Eigen::Index> kept;  // panel columns that survived
};

/// Householder-based economy orthonormalization of a panel, dropping columns
/// whose R diagonal falls at or below the tolerance.
inline OrthResult orthonormalize_panel(const Eigen::MatrixXd& panel,
                                       double tol) {
  OrthResult out;
  const Eigen::Index m = panel.cols();
  if (m == 0) {
    out.q.resize(panel.rows(), 0);
    return out;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(panel);
  Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  bool deficient = false;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(std::abs(r(j, j)) > tol)) deficient = true;
  }
  if (!deficient) {
    out.q = qr.householderQ() * Eigen::MatrixXd::Identity(panel.rows(), m);
    out.kept.resize(static_cast<std::size_t>(m));
    std::iota(out.kept.begin(), out.kept.end(), Eigen::Index{0});
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cqr(panel);
  Eigen::MatrixXd rr =
      cqr.matrixQR().topRows(std::min(m, panel.rows())).triangularView<Eigen::Upper>();
  Eigen::Index rank = 0;
  while (rank < rr.rows() && rank < m && std::abs(rr(rank, rank)) > tol) ++rank;
  out.q = cqr.householderQ() * Eigen::MatrixXd::Identity(panel.rows(), rank);
  const auto& perm = cqr.colsPermutation().indices();
  out.kept.reserve(static_cast<std::size_t>(rank));
  for (Eigen::Index j = 0; j < rank; ++j) {
    out.kept.push_back(static_cast<Eigen::Index>(perm[j]));
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

}  // namespace detail

/// Accelerated randomly pivoted QR: proposals are thinned with the shared
/// rejection-sampling sweep applied to the Gram block of the residual panel,
/// then the accepted panel is orthogonalized twice against Q and
/// orthonormalized.  Numerically dependent panel columns are dropped
/// (tolerance 1e-12 * ||B||_F) and recorded per round.
inline QrResult accelerated_rp_qr(const Eigen::MatrixXd& b_mat,
                                  const RunConfig& cfg) {
  const Eigen::Index m_rows = b_mat.rows();
  const Eigen::Index n_cols = b_mat.cols();
  const Eigen::Index b = cfg.block_size;
  if (b < 1) throw std::invalid_argument("accelerated_rp_qr: block size must be >= 1");
  Eigen::VectorXd u = b_mat.colwise().squaredNorm();
  if (!(u.sum() > 0.0)) throw std::invalid_argument("accelerated_rp_qr: matrix must be nonzero");
  const double drop_tol = 1e-12 * b_mat.norm();

  QrResult res;
  const Eigen::Index max_rank = std::min(m_rows, n_cols);
  Eigen::Index cap = cfg.mode == RunConfig::Mode::FixedRounds
                         ? std::min(max_rank, cfg.rounds * b)
                         : std::min(max_rank, cfg.target_rank + b);
  res.approx.q_factor.resize(m_rows, cap);
  res.approx.f_factor.resize(n_cols, cap);
  Eigen::Index kcur = 0;
  SplitMix64 rng(cfg.seed);
  for (Eigen::Index round = 0; !detail::run_finished(cfg, round, kcur); ++round) {
    if (!(u.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    const Eigen::VectorXd cumsum = cumulative_sums(u);
    IndexList proposed(static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      proposed[static_cast<std::size_t>(j)] = sample_discrete(cumsum, rng);
    }
    Eigen::MatrixXd c(m_rows, b);
    for (Eigen::Index j = 0; j < b; ++j) {
      c.col(j) = b_mat.col(proposed[static_cast<std::size_t>(j)]);
    }
    if (kcur > 0) {
      Eigen::MatrixXd f_rows =
          detail::gather_matrix_rows(res.approx.f_factor.leftCols(kcur), proposed);
      c.noalias() -= res.approx.q_factor.leftCols(kcur) * f_rows.transpose();
    }
    Eigen::MatrixXd h = c.transpose() * c;
    h = 0.5 * (h + h.transpose()).eval();
    RejectionSample sel = rejection_sample_submatrix(std::move(h), proposed, rng);
    // Cholesky output of the sweep is not used on the QR path.
    const Eigen::Index m = static_cast<Eigen::Index>(sel.accepted.size());
    RoundRecord record;
    record.proposed = std::move(proposed);
    if (m > 0) {
      Eigen::MatrixXd panel(m_rows, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        panel.col(j) = c.col(sel.positions[static_cast<std::size_t>(j)]);
      }
      if (kcur > 0) {
        // Second Gram-Schmidt pass against the accumulated basis.
        panel.noalias() -= res.approx.q_factor.leftCols(kcur) *
                           (res.approx.q_factor.leftCols(kcur).transpose() * panel);
      }
      detail::OrthResult orth = detail::orthonormalize_panel(panel, drop_tol);
      const Eigen::Index kept_count = static_cast<Eigen::Index>(orth.kept.size());
      std::vector<bool> kept_mask(static_cast<std::size_t>(m), false);
      for (Eigen::Index j : orth.kept) kept_mask[static_cast<std::size_t>(j)] = true;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (kept_mask[static_cast<std::size_t>(j)]) {
          record.accepted.push_back(sel.accepted[static_cast<std::size_t>(j)]);
        } else {
          record.dropped.push_back(sel.accepted[static_cast<std::size_t>(j)]);
        }
      }
      if (kept_count > 0) {
        if (kcur + kept_count > res.approx.q_factor.cols()) {
          res.approx.q_factor.conservativeResize(m_rows, kcur + kept_count);
          res.approx.f_factor.conservativeResize(n_cols, kcur + kept_count);
        }
        Eigen::MatrixXd f_new = b_mat.transpose() * orth.q;
        res.approx.q_factor.middleCols(kcur, kept_count) = orth.q;
        res.approx.f_factor.middleCols(kcur, kept_count) = f_new;
        u -= f_new.rowwise().squaredNorm();
        u = u.cwiseMax(0.0);
        res.approx.pivots.insert(res.approx.pivots.end(), record.accepted.begin(),
                                 record.accepted.end());
        kcur += kept_count;
      }
    }
    res.trace.rounds.push_back(std::move(record));
  }
  res.approx.q_factor.conservativeResize(m_rows, kcur);
  res.approx.f_factor.conservativeResize(n_cols, kcur);
  res.residual_col_norms = u;
  detail::finalize_surplus(cfg, res.trace, kcur);
  return res;
}

/// Deterministic partial QR with a forced pivot sequence.  Throws on a pivot
/// whose residual column is numerically zero.
inline QrApprox partial_qr_with_pivots(const Eigen::MatrixXd& b_mat,
                                       IndexSpan pivots) {
  const Eigen::Index m_rows = b_mat.rows();
  const Eigen::Index n_cols = b_mat.cols();
  check_indices(pivots, n_cols, "partial_qr_with_pivots");
  const Eigen::Index k = static_cast<Eigen::Index>(pivots.size());
  const double tol = 1e-12 * b_mat.norm();
  QrApprox out;
  out.q_factor.resize(m_rows, k);
  out.f_factor.resize(n_cols, k);
  out.pivots.assign(pivots.begin(), pivots.end());
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index s = pivots[static_cast<std::size_t>(i)];
    Eigen::VectorXd g = b_mat.col(s);
    if (i > 0) {
      g.noalias() -= out.q_factor.leftCols(i) *
                     out.f_factor.row(s).head(i).transpose();
    }
    const double norm_g = g.norm();
    if (!(norm_g > tol)) {
      throw std::runtime_error("partial_qr_with_pivots: degenerate pivot");
    }
    out.q_factor.col(i) = g / norm_g;
    out.f_factor.col(i).noalias() = b_mat.transpose() * out.q_factor.col(i);
  }
  return out;
}

/// Deterministic partial Cholesky with a forced pivot sequence on a dense psd
/// matrix.  Returns the N x k factor.
inline Eigen::MatrixXd partial_cholesky_with_pivots(const Eigen::MatrixXd& a,
                                                    IndexSpan pivots) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("partial_cholesky_with_pivots: matrix must be square");
  }
  check_indices(pivots, a.rows(), "partial_cholesky_with_pivots");
  const Eigen::Index n = a.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(pivots.size());
  const double tol = 1e-12 * a.diagonal().sum();
  Eigen::MatrixXd f(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index s = pivots[static_cast<std::size_t>(i)];
    Eigen::VectorXd g = a.col(s);
    if (i > 0) {
      g.noalias() -= f.leftCols(i) * f.row(s).head(i).transpose();
    }
    if (!(g[s] > tol)) {
      throw std::runtime_error("partial_cholesky_with_pivots: degenerate pivot");
    }
    f.col(i) = g / std::sqrt(g[s]);
  }
  return f;
}

/// Max-abs entry of Bhat^T Bhat - Ahat where both approximations use the
/// same forced pivot sequence on B and on B^T B respectively.
inline double qr_cholesky_crosscheck(const Eigen::MatrixXd& b_mat,
                                     IndexSpan pivots) {
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    for (std::size_t j = i + 1; j < pivots.size(); ++j) {
      if (pivots[i] == pivots[j]) {
        throw std::invalid_argument("qr_cholesky_crosscheck: pivots must be distinct");
      }
    }
  }
  QrApprox qr = partial_qr_with_pivots(b_mat, pivots);
  Eigen::MatrixXd bhat = qr.q_factor * qr.f_factor.transpose();
  Eigen::MatrixXd gram = b_mat.transpose() * b_mat;
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::MatrixXd f = partial_cholesky_with_pivots(gram, pivots);
  Eigen::MatrixXd ahat = f * f.transpose();
  return (bhat.transpose() * bhat - ahat).cwiseAbs().maxCoeff();
}

}  // namespace rpchol

#endif  // RPCHOL_RPQR_HPP
