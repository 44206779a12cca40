/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_RPCHOLESKY_HPP
#define RPCHOL_RPCHOLESKY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rpchol/oracle.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

/// Run controls shared by the blocked algorithms.
///
/// RNG stream contract: every round consumes first the block_size proposal
/// draws (inverse-CDF on the cumulative sums of the residual diagonal), then,
/// for the rejection-sampling methods, exactly block_size uniform
/// accept/reject draws in sweep order.  Draws are consumed even for rejected
/// proposals, which makes the standard and low-memory accelerated
/// implementations comparable pivot-for-pivot under the same seed.
struct RunConfig {
  enum class Mode { FixedRounds, UntilRank };

  Eigen::Index block_size = 1;
  Mode mode = Mode::UntilRank;
  Eigen::Index rounds = 0;       // FixedRounds
  Eigen::Index target_rank = 0;  // UntilRank
  std::uint64_t seed = 0;
  double stop_tol = 0.0;  // 0 disables the early exit

  static RunConfig fixed_rounds(Eigen::Index t, Eigen::Index b,
                                std::uint64_t seed) {
    RunConfig cfg;
    cfg.mode = Mode::FixedRounds;
    cfg.rounds = t;
    cfg.block_size = b;
    cfg.seed = seed;
    if (t < 1 || b < 1) throw std::invalid_argument("RunConfig: t, b must be >= 1");
    return cfg;
  }

  static RunConfig until_rank(Eigen::Index k, Eigen::Index b,
                              std::uint64_t seed) {
    RunConfig cfg;
    cfg.mode = Mode::UntilRank;
    cfg.target_rank = k;
    cfg.block_size = b;
    cfg.seed = seed;
    if (k < 1 || b < 1) throw std::invalid_argument("RunConfig: k, b must be >= 1");
    return cfg;
  }
};

/// Factored psd approximation A ~ F F^T restricted to the chosen pivots.
struct LowRankApprox {
  Eigen::MatrixXd factor;          // N x k, column-major
  IndexList pivots;                // ordered, distinct
  Eigen::MatrixXd chol_factor;     // k x k lower triangular, A(S,S) = L L^T

  Eigen::Index rank() const noexcept { return factor.cols(); }
};

struct RoundRecord {
  IndexList proposed;
  IndexList accepted;
  IndexList dropped;  // QR path: accepted columns removed as numerically dependent
};

/// Per-round bookkeeping of the sampling process.
struct PivotTrace {
  std::vector<RoundRecord> rounds;
  bool rank_exhausted = false;
  Eigen::Index surplus = 0;  // accepted pivots beyond the requested rank

  Eigen::Index total_proposed() const noexcept {
    Eigen::Index n = 0;
    for (const auto& r : rounds) n += static_cast<Eigen::Index>(r.proposed.size());
    return n;
  }
  Eigen::Index total_accepted() const noexcept {
    Eigen::Index n = 0;
    for (const auto& r : rounds) n += static_cast<Eigen::Index>(r.accepted.size());
    return n;
  }
  double acceptance_rate() const noexcept {
    const Eigen::Index p = total_proposed();
    return p == 0 ? 0.0 : static_cast<double>(total_accepted()) / static_cast<double>(p);
  }
};

struct CholeskyResult {
  LowRankApprox approx;
  PivotTrace trace;
  Eigen::VectorXd residual_diag;
};

/// Low-memory result: the approximation is defined implicitly by the pivots
/// and the Cholesky factor of A(S, S).
struct LowMemResult {
  IndexList pivots;
  Eigen::MatrixXd chol_factor;
  PivotTrace trace;
  Eigen::VectorXd residual_diag;
};

struct RejectionSample {
  IndexList accepted;        // pivot values, in sweep order
  IndexList positions;       // positions within the proposal list
  Eigen::MatrixXd chol_factor;  // Cholesky factor of the accepted block
};

namespace detail {

inline Eigen::MatrixXd gather_matrix_rows(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                          IndexSpan idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// F(S, :) with the strict upper triangle zeroed.  In the pivot ordering the
/// factor rows form the Cholesky factor of A(S, S) up to roundoff.
inline Eigen::MatrixXd pivot_rows_as_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                              const IndexList& pivots) {
  Eigen::MatrixXd l = gather_matrix_rows(f, pivots);
  l.triangularView<Eigen::StrictlyUpper>().setZero();
  return l;
}

inline void right_solve_lower_transposed(const Eigen::MatrixXd& l,
                                         Eigen::Ref<Eigen::MatrixXd> g) {
  // g <- g * l^{-T}
  l.transpose().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(g);
}

inline IndexList unique_sorted(IndexSpan idx) {
  IndexList out(idx.begin(), idx.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Sweeps the proposals of one round, accepting proposal i with probability
/// h_ii / u_i where u is the diagonal of H on entry and h_ii is the current
/// Schur-complement diagonal.  Each acceptance performs one Cholesky
/// elimination step.  Exactly one uniform draw is consumed per proposal,
/// accepted or not.
inline RejectionSample rejection_sample_submatrix(Eigen::MatrixXd h,
                                                  IndexSpan proposals,
                                                  SplitMix64& rng) {
  const Eigen::Index b = h.rows();
  if (h.cols() != b || static_cast<Eigen::Index>(proposals.size()) != b) {
    throw std::invalid_argument("rejection_sample_submatrix: size mismatch");
  }
  const Eigen::VectorXd u = h.diagonal();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(b, b);
  RejectionSample out;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double r = rng.next_double();
    if (u[i] * r < h(i, i)) {
      // Accepted: h(i, i) > 0 is guaranteed since u[i] >= 0 and r >= 0.
      const double root = std::sqrt(h(i, i));
      const Eigen::Index tail = b - i;
      l.col(i).tail(tail) = h.col(i).tail(tail) / root;
      if (tail > 1) {
        h.bottomRightCorner(tail - 1, tail - 1).noalias() -=
            l.col(i).tail(tail - 1) * l.col(i).tail(tail - 1).transpose();
      }
      out.positions.push_back(i);
      out.accepted.push_back(proposals[static_cast<std::size_t>(i)]);
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(out.positions.size());
  out.chol_factor.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      out.chol_factor(i, j) = l(out.positions[static_cast<std::size_t>(i)],
                                out.positions[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

/// Simple randomly pivoted Cholesky: k pivots drawn sequentially with
/// probability proportional to the residual diagonal, one oracle column per
/// pivot.
inline CholeskyResult simple_rpcholesky(const PsdOracle& oracle, Eigen::Index k,
                                        std::uint64_t seed) {
  const Eigen::Index n = oracle.dimension();
  if (k < 1 || k > n) throw std::invalid_argument("simple_rpcholesky: need 1 <= k <= N");
  Eigen::VectorXd d = oracle.diag().cwiseMax(0.0);
  const double trace_a = d.sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("simple_rpcholesky: trace must be > 0");

  CholeskyResult res;
  res.approx.factor.resize(n, k);
  Eigen::Index kcur = 0;
  SplitMix64 rng(seed);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(d.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    const Eigen::Index s = sample_discrete(cumulative_sums(d), rng);
    IndexList col{s};
    Eigen::VectorXd g = oracle.columns(col).col(0);
    if (kcur > 0) {
      g.noalias() -= res.approx.factor.leftCols(kcur) *
                     res.approx.factor.row(s).head(kcur).transpose();
    }
    if (!(g[s] > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    res.approx.factor.col(kcur) = g / std::sqrt(g[s]);
    d -= res.approx.factor.col(kcur).cwiseAbs2();
    d = d.cwiseMax(0.0);
    res.approx.pivots.push_back(s);
    res.trace.rounds.push_back({{s}, {s}, {}});
    ++kcur;
  }
  res.approx.factor.conservativeResize(n, kcur);
  res.approx.chol_factor =
      detail::pivot_rows_as_cholesky(res.approx.factor, res.approx.pivots);
  res.residual_diag = d;
  return res;
}

namespace detail {

inline bool run_finished(const RunConfig& cfg, Eigen::Index round,
                         Eigen::Index accepted_total) {
  if (cfg.mode == RunConfig::Mode::FixedRounds) return round >= cfg.rounds;
  return accepted_total >= cfg.target_rank;
}

inline void finalize_surplus(const RunConfig& cfg, PivotTrace& trace,
                             Eigen::Index accepted_total) {
  if (cfg.mode == RunConfig::Mode::UntilRank &&
      accepted_total > cfg.target_rank) {
    trace.surplus = accepted_total - cfg.target_rank;
  }
}

}  // namespace detail

/// Block randomly pivoted Cholesky: every deduplicated proposal of a round is
/// retained and eliminated through one Cholesky of the round block.
inline CholeskyResult block_rpcholesky(const PsdOracle& oracle,
                                       const RunConfig& cfg) {
  const Eigen::Index n = oracle.dimension();
  const Eigen::Index b = cfg.block_size;
  if (b < 1) throw std::invalid_argument("block_rpcholesky: block size must be >= 1");
  Eigen::VectorXd d = oracle.diag().cwiseMax(0.0);
  const double trace_a = d.sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("block_rpcholesky: trace must be > 0");

  CholeskyResult res;
  Eigen::Index cap = cfg.mode == RunConfig::Mode::FixedRounds
                         ? std::min(n, cfg.rounds * b)
                         : std::min(n, cfg.target_rank + b);
  res.approx.factor.resize(n, cap);
  Eigen::Index kcur = 0;
  double captured_sq = 0.0;
  SplitMix64 rng(cfg.seed);
  for (Eigen::Index round = 0; !detail::run_finished(cfg, round, kcur); ++round) {
    if (!(d.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    if (cfg.stop_tol > 0.0 && (trace_a - captured_sq) <= cfg.stop_tol * trace_a) break;
    const Eigen::VectorXd cumsum = cumulative_sums(d);
    IndexList proposed(static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      proposed[static_cast<std::size_t>(j)] = sample_discrete(cumsum, rng);
    }
    IndexList kept = detail::unique_sorted(proposed);
    const Eigen::Index m = static_cast<Eigen::Index>(kept.size());
    if (kcur + m > res.approx.factor.cols()) {
      res.approx.factor.conservativeResize(n, kcur + m);
    }
    Eigen::MatrixXd g = oracle.columns(kept);
    if (kcur > 0) {
      Eigen::MatrixXd f_rows =
          detail::gather_matrix_rows(res.approx.factor.leftCols(kcur), kept);
      g.noalias() -= res.approx.factor.leftCols(kcur) * f_rows.transpose();
    }
    Eigen::MatrixXd block = detail::gather_matrix_rows(g, kept);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) {
      const double shift =
          64.0 * std::numeric_limits<double>::epsilon() * trace_a / static_cast<double>(n);
      block.diagonal().array() += shift;
      llt.compute(block);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("block_rpcholesky: Cholesky failed after diagonal shift");
      }
    }
    detail::right_solve_lower_transposed(llt.matrixL(), g);
    res.approx.factor.middleCols(kcur, m) = g;
    d -= g.rowwise().squaredNorm();
    d = d.cwiseMax(0.0);
    captured_sq += g.squaredNorm();
    res.approx.pivots.insert(res.approx.pivots.end(), kept.begin(), kept.end());
    res.trace.rounds.push_back({std::move(proposed), std::move(kept), {}});
    kcur += m;
  }
  res.approx.factor.conservativeResize(n, kcur);
  res.approx.chol_factor =
      detail::pivot_rows_as_cholesky(res.approx.factor, res.approx.pivots);
  res.residual_diag = d;
  detail::finalize_surplus(cfg, res.trace, kcur);
  return res;
}

/// Accelerated randomly pivoted Cholesky: per round, block_size i.i.d.
/// proposals from the tracked residual diagonal are thinned by rejection
/// sampling, and only the accepted columns are generated and eliminated.
inline CholeskyResult accelerated_rpcholesky(const PsdOracle& oracle,
                                             const RunConfig& cfg) {
  const Eigen::Index n = oracle.dimension();
  const Eigen::Index b = cfg.block_size;
  if (b < 1) throw std::invalid_argument("accelerated_rpcholesky: block size must be >= 1");
  Eigen::VectorXd u = oracle.diag().cwiseMax(0.0);
  const double trace_a = u.sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("accelerated_rpcholesky: trace must be > 0");

  CholeskyResult res;
  Eigen::Index cap = cfg.mode == RunConfig::Mode::FixedRounds
                         ? std::min(n, cfg.rounds * b)
                         : std::min(n, cfg.target_rank + b);
  res.approx.factor.resize(n, cap);
  Eigen::Index kcur = 0;
  double captured_sq = 0.0;
  SplitMix64 rng(cfg.seed);
  for (Eigen::Index round = 0; !detail::run_finished(cfg, round, kcur); ++round) {
    if (!(u.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    if (cfg.stop_tol > 0.0 && (trace_a - captured_sq) <= cfg.stop_tol * trace_a) break;
    const Eigen::VectorXd cumsum = cumulative_sums(u);
    IndexList proposed(static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      proposed[static_cast<std::size_t>(j)] = sample_discrete(cumsum, rng);
    }
    Eigen::MatrixXd h = oracle.submatrix(proposed, proposed);
    if (kcur > 0) {
      Eigen::MatrixXd f_rows =
          detail::gather_matrix_rows(res.approx.factor.leftCols(kcur), proposed);
      h.noalias() -= f_rows * f_rows.transpose();
    }
    RejectionSample sel = rejection_sample_submatrix(std::move(h), proposed, rng);
    const Eigen::Index m = static_cast<Eigen::Index>(sel.accepted.size());
    if (m > 0) {
      if (kcur + m > res.approx.factor.cols()) {
        res.approx.factor.conservativeResize(n, kcur + m);
      }
      Eigen::MatrixXd g = oracle.columns(sel.accepted);
      if (kcur > 0) {
        Eigen::MatrixXd f_rows = detail::gather_matrix_rows(
            res.approx.factor.leftCols(kcur), sel.accepted);
        g.noalias() -= res.approx.factor.leftCols(kcur) * f_rows.transpose();
      }
      detail::right_solve_lower_transposed(sel.chol_factor, g);
      res.approx.factor.middleCols(kcur, m) = g;
      u -= g.rowwise().squaredNorm();
      u = u.cwiseMax(0.0);
      captured_sq += g.squaredNorm();
      res.approx.pivots.insert(res.approx.pivots.end(), sel.accepted.begin(),
                               sel.accepted.end());
      kcur += m;
    }
    res.trace.rounds.push_back({std::move(proposed), std::move(sel.accepted), {}});
  }
  res.approx.factor.conservativeResize(n, kcur);
  res.approx.chol_factor =
      detail::pivot_rows_as_cholesky(res.approx.factor, res.approx.pivots);
  res.residual_diag = u;
  detail::finalize_surplus(cfg, res.trace, kcur);
  return res;
}

/// Low-memory accelerated RPCholesky.  Produces the same pivot sequence and
/// acceptance decisions as accelerated_rpcholesky under the same seed, but
/// stores only O(N + k^2) state: the pivots, the Cholesky factor of A(S, S),
/// and the tracked residual diagonal.  Matrix entries are regenerated from
/// the oracle whenever they are needed.
inline LowMemResult accelerated_rpcholesky_lowmem(const PsdOracle& oracle,
                                                  const RunConfig& cfg) {
  const Eigen::Index n = oracle.dimension();
  const Eigen::Index b = cfg.block_size;
  if (b < 1) throw std::invalid_argument("accelerated_rpcholesky_lowmem: block size must be >= 1");
  Eigen::VectorXd u = oracle.diag().cwiseMax(0.0);
  const double trace_a = u.sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("accelerated_rpcholesky_lowmem: trace must be > 0");

  LowMemResult res;
  Eigen::MatrixXd l(0, 0);
  double captured_sq = 0.0;
  SplitMix64 rng(cfg.seed);
  for (Eigen::Index round = 0;
       !detail::run_finished(cfg, round, static_cast<Eigen::Index>(res.pivots.size()));
       ++round) {
    if (!(u.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    if (cfg.stop_tol > 0.0 && (trace_a - captured_sq) <= cfg.stop_tol * trace_a) break;
    const Eigen::Index k_old = static_cast<Eigen::Index>(res.pivots.size());
    const Eigen::VectorXd cumsum = cumulative_sums(u);
    IndexList proposed(static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      proposed[static_cast<std::size_t>(j)] = sample_discrete(cumsum, rng);
    }
    Eigen::MatrixXd h = oracle.submatrix(proposed, proposed);
    Eigen::MatrixXd w_prop;  // L^{-1} A(S, S'), |S| x b
    if (k_old > 0) {
      w_prop = oracle.submatrix(res.pivots, proposed);
      l.triangularView<Eigen::Lower>().solveInPlace(w_prop);
      h.noalias() -= w_prop.transpose() * w_prop;
    }
    RejectionSample sel = rejection_sample_submatrix(std::move(h), proposed, rng);
    const Eigen::Index m = static_cast<Eigen::Index>(sel.accepted.size());
    if (m > 0) {
      Eigen::MatrixXd w_acc(k_old, m);  // L^{-1} A(S_old, S_new)
      for (Eigen::Index j = 0; j < m; ++j) {
        if (k_old > 0) {
          w_acc.col(j) = w_prop.col(sel.positions[static_cast<std::size_t>(j)]);
        }
      }
      // Diagonal update in row chunks of size b; one oracle block per chunk.
      IndexList s_all = res.pivots;
      s_all.insert(s_all.end(), sel.accepted.begin(), sel.accepted.end());
      for (Eigen::Index r0 = 0; r0 < n; r0 += b) {
        const Eigen::Index height = std::min(b, n - r0);
        IndexList chunk(static_cast<std::size_t>(height));
        std::iota(chunk.begin(), chunk.end(), r0);
        Eigen::MatrixXd a_chunk = oracle.submatrix(chunk, s_all);
        Eigen::MatrixXd g = a_chunk.rightCols(m);
        if (k_old > 0) {
          Eigen::MatrixXd y = a_chunk.leftCols(k_old).transpose();  // A(S_old, R)
          l.triangularView<Eigen::Lower>().solveInPlace(y);
          g.noalias() -= y.transpose() * w_acc;
        }
        detail::right_solve_lower_transposed(sel.chol_factor, g);
        u.segment(r0, height) -= g.rowwise().squaredNorm();
        captured_sq += g.squaredNorm();
      }
      // Trailing-block Cholesky update.
      Eigen::MatrixXd l_next = Eigen::MatrixXd::Zero(k_old + m, k_old + m);
      l_next.topLeftCorner(k_old, k_old) = l;
      if (k_old > 0) l_next.bottomLeftCorner(m, k_old) = w_acc.transpose();
      l_next.bottomRightCorner(m, m) = sel.chol_factor;
      l = std::move(l_next);
      res.pivots.insert(res.pivots.end(), sel.accepted.begin(), sel.accepted.end());
    }
    u = u.cwiseMax(0.0);
    res.trace.rounds.push_back({std::move(proposed), std::move(sel.accepted), {}});
  }
  res.chol_factor = std::move(l);
  res.residual_diag = u;
  detail::finalize_surplus(cfg, res.trace,
                           static_cast<Eigen::Index>(res.pivots.size()));
  return res;
}

/// Robust blockwise random pivoting, Cholesky form.  Proposals are drawn as
/// in block RPCholesky; within the round, greedy column-pivoted elimination
/// runs until the squared Frobenius norm of the not-yet-eliminated residual
/// columns drops to 1/b of its starting value.
inline CholeskyResult rbrp_cholesky(const PsdOracle& oracle,
                                    const RunConfig& cfg) {
  const Eigen::Index n = oracle.dimension();
  const Eigen::Index b = cfg.block_size;
  if (b < 1) throw std::invalid_argument("rbrp_cholesky: block size must be >= 1");
  Eigen::VectorXd d = oracle.diag().cwiseMax(0.0);
  const double trace_a = d.sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("rbrp_cholesky: trace must be > 0");

  CholeskyResult res;
  Eigen::Index cap = cfg.mode == RunConfig::Mode::FixedRounds
                         ? std::min(n, cfg.rounds * b)
                         : std::min(n, cfg.target_rank + b);
  res.approx.factor.resize(n, cap);
  Eigen::Index kcur = 0;
  double captured_sq = 0.0;
  SplitMix64 rng(cfg.seed);
  for (Eigen::Index round = 0; !detail::run_finished(cfg, round, kcur); ++round) {
    if (!(d.sum() > 0.0)) {
      res.trace.rank_exhausted = true;
      break;
    }
    if (cfg.stop_tol > 0.0 && (trace_a - captured_sq) <= cfg.stop_tol * trace_a) break;
    const Eigen::VectorXd cumsum = cumulative_sums(d);
    IndexList proposed(static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      proposed[static_cast<std::size_t>(j)] = sample_discrete(cumsum, rng);
    }
    IndexList pool = detail::unique_sorted(proposed);
    const Eigen::Index m = static_cast<Eigen::Index>(pool.size());
    Eigen::MatrixXd g = oracle.columns(pool);
    if (kcur > 0) {
      Eigen::MatrixXd f_rows =
          detail::gather_matrix_rows(res.approx.factor.leftCols(kcur), pool);
      g.noalias() -= res.approx.factor.leftCols(kcur) * f_rows.transpose();
    }
    const double threshold = g.squaredNorm() / static_cast<double>(b);
    std::vector<bool> alive(static_cast<std::size_t>(m), true);
    IndexList accepted;
    while (true) {
      // Greedy rule: largest residual diagonal, ties to the lowest index.
      Eigen::Index best = -1;
      double best_diag = 0.0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!alive[static_cast<std::size_t>(c)]) continue;
        const double hc = g(pool[static_cast<std::size_t>(c)], c);
        if (hc > best_diag) {
          best_diag = hc;
          best = c;
        }
      }
      if (best < 0) break;
      if (kcur + 1 > res.approx.factor.cols()) {
        res.approx.factor.conservativeResize(n, kcur + 1);
      }
      Eigen::VectorXd f = g.col(best) / std::sqrt(best_diag);
      res.approx.factor.col(kcur) = f;
      accepted.push_back(pool[static_cast<std::size_t>(best)]);
      alive[static_cast<std::size_t>(best)] = false;
      ++kcur;
      double remaining = 0.0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!alive[static_cast<std::size_t>(c)]) continue;
        g.col(c) -= f * f[pool[static_cast<std::size_t>(c)]];
        remaining += g.col(c).squaredNorm();
      }
      if (remaining <= threshold) break;
    }
    const Eigen::Index accepted_count = static_cast<Eigen::Index>(accepted.size());
    const auto new_cols = res.approx.factor.middleCols(kcur - accepted_count, accepted_count);
    d -= new_cols.rowwise().squaredNorm();
    d = d.cwiseMax(0.0);
    captured_sq += new_cols.squaredNorm();
    res.approx.pivots.insert(res.approx.pivots.end(), accepted.begin(), accepted.end());
    res.trace.rounds.push_back({std::move(proposed), std::move(accepted), {}});
  }
  res.approx.factor.conservativeResize(n, kcur);
  res.approx.chol_factor =
      detail::pivot_rows_as_cholesky(res.approx.factor, res.approx.pivots);
  res.residual_diag = d;
  detail::finalize_surplus(cfg, res.trace, kcur);
  return res;
}

/// (tr A - sum_j ||F(:,j)||^2) / tr A through the trace identity, clamped to
/// [0, 1].
inline double relative_trace_error(const PsdOracle& oracle,
                                   const LowRankApprox& approx) {
  const double trace_a = oracle.diag().sum();
  if (!(trace_a > 0.0)) throw std::invalid_argument("relative_trace_error: trace must be > 0");
  const double err = (trace_a - approx.factor.squaredNorm()) / trace_a;
  return std::clamp(err, 0.0, 1.0);
}

}  // namespace rpchol

#endif  // RPCHOL_RPCHOLESKY_HPP
