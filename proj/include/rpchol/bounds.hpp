/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_BOUNDS_HPP
#define RPCHOL_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rpchol {

/// Non-increasing, nonnegative eigenvalue vector.
inline void validate_spectrum(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("spectrum: empty");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw std::invalid_argument("spectrum: entries must be finite and >= 0");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      throw std::invalid_argument("spectrum: entries must be non-increasing");
    }
  }
}

/// Inputs to the sufficient-pivot evaluators.
struct BoundQuery {
  Eigen::Index target_rank = 1;  // r
  double accuracy = 1.0;         // epsilon
  Eigen::Index block_size = 1;   // b
  Eigen::VectorXd spectrum;      // sorted non-increasing

  double head_sum() const { return spectrum.head(target_rank).sum(); }
  double tail_sum() const {
    return spectrum.tail(spectrum.size() - target_rank).sum();
  }
  double eta() const {
    const double head = head_sum();
    if (!(head > 0.0)) throw std::invalid_argument("BoundQuery: leading eigenvalue sum must be > 0");
    return tail_sum() / head;
  }

  void validate() const {
    validate_spectrum(spectrum);
    if (target_rank < 1 || target_rank >= spectrum.size()) {
      throw std::invalid_argument("BoundQuery: need 1 <= r < N");
    }
    if (!(accuracy > 0.0)) throw std::invalid_argument("BoundQuery: accuracy must be > 0");
    if (block_size < 1) throw std::invalid_argument("BoundQuery: block size must be >= 1");
    (void)eta();
  }
};

struct BoundReport {
  double sufficient_count = 0.0;  // pivots k or proposals bt, as a real
  double eta = 0.0;
  bool log_floored = false;       // eps*eta >= 1: log term clipped at 0
  bool exact_rank_regime = false; // eta == 0: bound degenerates to +inf
  std::vector<double> trajectory;
};

/// phi_alpha(x) = x - x^2/alpha iterated b times.  Domain [0, alpha].
inline double phi(double alpha, double x, Eigen::Index b) {
  if (!(alpha > 0.0)) throw std::invalid_argument("phi: alpha must be > 0");
  if (!(x >= 0.0) || !(x <= alpha)) {
    throw std::invalid_argument("phi: x must lie in [0, alpha]");
  }
  for (Eigen::Index i = 0; i < b; ++i) {
    x = x - x * x / alpha;
  }
  return x;
}

/// t applications of Phi_b to a diagonal spectrum: each application fixes
/// alpha at the current trace and maps every eigenvalue through the b-fold
/// iterate.  The result is re-sorted non-increasing.
inline Eigen::VectorXd phi_matrix_diag(const Eigen::VectorXd& spectrum,
                                       Eigen::Index b, Eigen::Index t) {
  validate_spectrum(spectrum);
  if (b < 1) throw std::invalid_argument("phi_matrix_diag: b must be >= 1");
  Eigen::VectorXd values = spectrum;
  for (Eigen::Index round = 0; round < t; ++round) {
    const double alpha = values.sum();
    if (!(alpha > 0.0)) return Eigen::VectorXd::Zero(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      values[i] = phi(alpha, std::min(values[i], alpha), b);
    }
    std::sort(values.data(), values.data() + values.size(),
              [](double a, double c) { return a > c; });
  }
  return values;
}

/// Sufficient pivot count k >= r/eps + r log(1/(eps eta)) for the simple and
/// accelerated samplers.
inline BoundReport sufficient_pivots_simple(const BoundQuery& q) {
  q.validate();
  BoundReport rep;
  rep.eta = q.eta();
  const double r = static_cast<double>(q.target_rank);
  if (rep.eta == 0.0) {
    rep.exact_rank_regime = true;
    rep.sufficient_count = std::numeric_limits<double>::infinity();
    return rep;
  }
  double log_term = std::log(1.0 / (q.accuracy * rep.eta));
  if (log_term < 0.0) {
    log_term = 0.0;
    rep.log_floored = true;
  }
  rep.sufficient_count = r / q.accuracy + r * log_term;
  return rep;
}

/// Sufficient proposal count bt >= r/eps + (r + b) log(1/(eps eta)) for the
/// blocked samplers.
inline BoundReport sufficient_proposals_block(const BoundQuery& q) {
  q.validate();
  BoundReport rep;
  rep.eta = q.eta();
  const double r = static_cast<double>(q.target_rank);
  const double b = static_cast<double>(q.block_size);
  if (rep.eta == 0.0) {
    rep.exact_rank_regime = true;
    rep.sufficient_count = std::numeric_limits<double>::infinity();
    return rep;
  }
  double log_term = std::log(1.0 / (q.accuracy * rep.eta));
  if (log_term < 0.0) {
    log_term = 0.0;
    rep.log_floored = true;
  }
  rep.sufficient_count = r / q.accuracy + (r + b) * log_term;
  return rep;
}

/// Large-block sufficient round count t >= 1 + log(1/eta + 1)/log(3/eps),
/// valid only for eps <= 3/2 and b >= 3r/eps.
inline BoundReport drvw_sufficient_rounds(const BoundQuery& q) {
  q.validate();
  const double r = static_cast<double>(q.target_rank);
  const double b = static_cast<double>(q.block_size);
  if (!(q.accuracy <= 1.5) || !(b >= 3.0 * r / q.accuracy)) {
    throw std::invalid_argument(
        "drvw_sufficient_rounds: outside theorem scope (need eps <= 3/2 and b >= 3r/eps)");
  }
  BoundReport rep;
  rep.eta = q.eta();
  if (rep.eta == 0.0) {
    rep.exact_rank_regime = true;
    rep.sufficient_count = 1.0;
    return rep;
  }
  rep.sufficient_count =
      1.0 + std::log(1.0 / rep.eta + 1.0) / std::log(3.0 / q.accuracy);
  return rep;
}

/// Trajectory of the worst-case leading-cluster mass:
///   alpha_{t+1} = alpha_t - b alpha_t^2 / ((b + r) alpha_t + r beta).
/// Returns alpha_0..alpha_t; positive and non-increasing.
inline std::vector<double> worst_case_recursion(double alpha0, double beta,
                                                Eigen::Index r, Eigen::Index b,
                                                Eigen::Index t) {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("worst_case_recursion: alpha0 must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("worst_case_recursion: beta must be >= 0");
  if (r < 1 || b < 1) throw std::invalid_argument("worst_case_recursion: r, b must be >= 1");
  std::vector<double> traj;
  traj.reserve(static_cast<std::size_t>(t) + 1);
  double alpha = alpha0;
  traj.push_back(alpha);
  const double rb = static_cast<double>(r);
  const double bb = static_cast<double>(b);
  for (Eigen::Index i = 0; i < t; ++i) {
    alpha -= bb * alpha * alpha / ((bb + rb) * alpha + rb * beta);
    traj.push_back(alpha);
  }
  return traj;
}

/// Two-cluster spectrum: r copies of gamma/r followed by N - r copies of
/// beta/(N - r), sorted non-increasing.
inline Eigen::VectorXd two_cluster_spectrum(Eigen::Index r, Eigen::Index n,
                                            double gamma, double beta) {
  if (r < 1 || r >= n) throw std::invalid_argument("two_cluster_spectrum: need 1 <= r < N");
  if (!(gamma >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("two_cluster_spectrum: cluster masses must be >= 0");
  }
  Eigen::VectorXd values(n);
  values.head(r).setConstant(gamma / static_cast<double>(r));
  values.tail(n - r).setConstant(beta / static_cast<double>(n - r));
  std::sort(values.data(), values.data() + n,
            [](double a, double c) { return a > c; });
  return values;
}

}  // namespace rpchol

#endif  // RPCHOL_BOUNDS_HPP
