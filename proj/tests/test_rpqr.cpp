/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpchol/bounds.hpp"
#include "rpchol/rpqr.hpp"
#include "test_support.hpp"

using namespace rpchol;
namespace rt = rpchol::testing;

namespace {

Eigen::MatrixXd qr_residual(const Eigen::MatrixXd& b, const QrApprox& approx) {
  return b - approx.q_factor * approx.f_factor.transpose();
}

}  // namespace

TEST_CASE("rp_qr captures a rank-1 matrix with one pivot") {
  SplitMix64 rng(21);
  Eigen::VectorXd u = rt::random_dense(9, 1, rng);
  Eigen::VectorXd v = rt::random_dense(7, 1, rng);
  Eigen::MatrixXd b = u * v.transpose();
  QrResult res = rp_qr(b, 1, 5);
  CHECK(qr_residual(b, res.approx).norm() <= 1e-12 * b.norm());
}

TEST_CASE("rp_qr first-pivot distribution follows squared column norms") {
  Eigen::MatrixXd b = Eigen::Vector2d(2, 1).asDiagonal();
  const int trials = 100000;
  int first = 0;
  for (int t = 0; t < trials; ++t) {
    QrResult res = rp_qr(b, 1, static_cast<std::uint64_t>(t));
    if (res.approx.pivots[0] == 0) ++first;
  }
  CHECK(static_cast<double>(first) / trials == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("rp_qr exhausts small integer matrices at their rank") {
  Eigen::MatrixXd b(4, 5);
  b << 1, 2, 3, 1, 0,
       0, 1, 1, 2, 2,
       1, 3, 4, 3, 2,   // row1 + row2
       2, 4, 6, 2, 0;   // 2 * row1
  // Dense SVD oracle pins the true rank.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
  }
  REQUIRE(rank == 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    QrResult res = rp_qr(b, rank, seed);
    CHECK(qr_residual(b, res.approx).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("accelerated rp_qr with b = 1 accepts every proposal and matches rp_qr's law") {
  Eigen::MatrixXd b = Eigen::Vector2d(2, 1).asDiagonal();
  const int trials = 100000;
  int first = 0;
  for (int t = 0; t < trials; ++t) {
    QrResult res =
        accelerated_rp_qr(b, RunConfig::fixed_rounds(1, 1, static_cast<std::uint64_t>(t)));
    REQUIRE(res.trace.rounds[0].accepted.size() == 1);
    if (res.approx.pivots[0] == 0) ++first;
  }
  CHECK(static_cast<double>(first) / trials == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("accelerated rp_qr keeps Q orthonormal") {
  SplitMix64 rng(22);
  for (int rep = 0; rep < 6; ++rep) {
    Eigen::MatrixXd b = rt::random_dense(20, 14, rng);
    for (Eigen::Index t = 1; t <= 4; ++t) {
      QrResult res = accelerated_rp_qr(
          b, RunConfig::fixed_rounds(t, 3, static_cast<std::uint64_t>(rep * 10 + t)));
      const Eigen::Index k = res.approx.rank();
      Eigen::MatrixXd gram =
          res.approx.q_factor.transpose() * res.approx.q_factor;
      CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("pythagoras identity under the orthonormal basis") {
  SplitMix64 rng(23);
  Eigen::MatrixXd b = rt::random_dense(18, 12, rng);
  QrResult res = accelerated_rp_qr(b, RunConfig::until_rank(6, 3, 9));
  const double lhs = qr_residual(b, res.approx).squaredNorm();
  const double rhs = b.squaredNorm() - res.approx.f_factor.squaredNorm();
  CHECK(std::abs(lhs - rhs) <= 1e-9 * b.squaredNorm());
}

TEST_CASE("sampling weights track the true residual column norms") {
  SplitMix64 rng(24);
  Eigen::MatrixXd b = rt::random_dense(16, 10, rng);
  for (Eigen::Index t = 1; t <= 4; ++t) {
    QrResult res = accelerated_rp_qr(b, RunConfig::fixed_rounds(t, 2, 77));
    Eigen::VectorXd truth =
        qr_residual(b, res.approx).colwise().squaredNorm();
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      CHECK(std::abs(res.residual_col_norms[j] - truth[j]) <=
            1e-8 * std::max(1.0, truth[j]));
    }
  }
}

TEST_CASE("forced pivot sequences make QR and Cholesky agree") {
  SplitMix64 rng(25);
  Eigen::MatrixXd b = rt::random_dense(14, 9, rng);
  QrResult res = accelerated_rp_qr(b, RunConfig::until_rank(5, 2, 3));
  // Re-run both deterministic factorizations with the pivots the random run
  // chose, and compare the psd approximations (dense computation).
  Eigen::MatrixXd gram = b.transpose() * b;
  QrApprox qr = partial_qr_with_pivots(b, res.approx.pivots);
  Eigen::MatrixXd bhat = qr.q_factor * qr.f_factor.transpose();
  Eigen::MatrixXd f = partial_cholesky_with_pivots(gram, res.approx.pivots);
  CHECK((bhat.transpose() * bhat - f * f.transpose()).cwiseAbs().maxCoeff() <=
        1e-9 * gram.trace());
}

TEST_CASE("qr_cholesky_crosscheck") {
  SUBCASE("orthogonal columns, single pivot") {
    Eigen::MatrixXd b(4, 2);
    b << 1, 0, 0, 2, 0, 0, 0, 0;
    IndexList pivots{0};
    CHECK(qr_cholesky_crosscheck(b, pivots) <= 1e-12);
  }
  SUBCASE("random 12x8 with 4 random pivots") {
    SplitMix64 rng(26);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::MatrixXd b = rt::random_dense(12, 8, rng);
      IndexList pivots = sample_without_replacement(8, 4, rng);
      CHECK(qr_cholesky_crosscheck(b, pivots) <=
            1e-10 * (b.transpose() * b).trace());
    }
  }
  SUBCASE("zero column pivot is degenerate") {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(5, 3);
    b.col(0).setOnes();
    IndexList pivots{1};
    CHECK_THROWS_AS((void)qr_cholesky_crosscheck(b, pivots), std::runtime_error);
  }
  SUBCASE("duplicate pivots are rejected") {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
    IndexList pivots{0, 0};
    CHECK_THROWS_AS((void)qr_cholesky_crosscheck(b, pivots), std::invalid_argument);
  }
}

TEST_CASE("panel orthonormalization drops dependent columns") {
  SplitMix64 rng(27);
  Eigen::MatrixXd panel(10, 3);
  panel.col(0) = rt::random_dense(10, 1, rng);
  panel.col(1) = rt::random_dense(10, 1, rng);
  panel.col(2) = 2.0 * panel.col(0) - panel.col(1);  // exactly dependent
  auto orth = rpchol::detail::orthonormalize_panel(panel, 1e-10);
  CHECK(orth.kept.size() == 2);
  CHECK(orth.q.cols() == 2);
  Eigen::MatrixXd gram = orth.q.transpose() * orth.q;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("residual norm bound from the sufficient-proposal count") {
  // Monte-Carlo check of the blocked error bound transported to QR: at the
  // prescribed number of proposals, the mean squared residual norm is within
  // (1 + eps) of the optimal rank-r tail, plus sampling error.
  SplitMix64 rng(28);
  Eigen::MatrixXd b = rt::random_dense(24, 16, rng);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  Eigen::VectorXd sq = svd.singularValues().cwiseAbs2();
  const Eigen::Index r = 3;
  const double eps = 0.5;
  const Eigen::Index block = 4;
  BoundQuery q;
  q.target_rank = r;
  q.accuracy = eps;
  q.block_size = block;
  q.spectrum = sq;
  const double bt = sufficient_proposals_block(q).sufficient_count;
  const Eigen::Index t = static_cast<Eigen::Index>(
      std::ceil(bt / static_cast<double>(block)));
  const double tail = sq.tail(sq.size() - r).sum();

  const int trials = 400;
  double mean = 0.0, sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    QrResult res = accelerated_rp_qr(
        b, RunConfig::fixed_rounds(t, block, static_cast<std::uint64_t>(trial)));
    const double resid = qr_residual(b, res.approx).squaredNorm();
    mean += resid;
    sum_sq += resid * resid;
  }
  mean /= trials;
  const double se = std::sqrt(std::max(0.0, sum_sq / trials - mean * mean) / trials);
  CHECK(mean <= (1.0 + eps) * tail + 3.0 * se);
}
