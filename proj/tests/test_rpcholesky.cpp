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

#include <set>

#include "rpchol/rpcholesky.hpp"
#include "test_support.hpp"

using namespace rpchol;
namespace rt = rpchol::testing;

namespace {

Eigen::MatrixXd reconstruct(const LowRankApprox& approx) {
  return approx.factor * approx.factor.transpose();
}

Eigen::MatrixXd reconstruct_lowmem(const Eigen::MatrixXd& a,
                                   const LowMemResult& res) {
  const Eigen::Index k = static_cast<Eigen::Index>(res.pivots.size());
  Eigen::MatrixXd a_cols(a.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    a_cols.col(j) = a.col(res.pivots[static_cast<std::size_t>(j)]);
  }
  // A(:, S) L^{-T} L^{-1} A(S, :)
  Eigen::MatrixXd w = a_cols.transpose();
  res.chol_factor.triangularView<Eigen::Lower>().solveInPlace(w);
  return w.transpose() * w;
}

}  // namespace

TEST_CASE("simple rpcholesky reproduces a rank-1 matrix with one pivot") {
  SplitMix64 rng(1);
  Eigen::VectorXd v = rt::random_dense(12, 1, rng);
  Eigen::MatrixXd a = v * v.transpose();
  DenseOracle oracle(a);
  CholeskyResult res = simple_rpcholesky(oracle, 1, 7);
  CHECK(res.approx.rank() == 1);
  CHECK((a - reconstruct(res.approx)).trace() <= 1e-12 * a.trace());
}

TEST_CASE("simple rpcholesky with k = N exhausts a full-rank matrix") {
  SplitMix64 rng(2);
  Eigen::MatrixXd a = rt::random_psd(8, 8, rng);
  a.diagonal().array() += 0.5;  // keep it comfortably full rank
  DenseOracle oracle(a);
  CholeskyResult res = simple_rpcholesky(oracle, 8, 3);
  CHECK(res.approx.rank() == 8);
  const double rel = relative_trace_error(oracle, res.approx);
  CHECK(rel <= 1e-10);
}

TEST_CASE("simple rpcholesky flags rank exhaustion") {
  SplitMix64 rng(3);
  Eigen::VectorXd v = rt::random_dense(10, 1, rng);
  Eigen::MatrixXd a = v * v.transpose();
  DenseOracle oracle(a);
  CholeskyResult res = simple_rpcholesky(oracle, 5, 11);
  CHECK(res.trace.rank_exhausted);
  CHECK(res.approx.rank() < 5);
}

TEST_CASE("relative_trace_error closed cases") {
  Eigen::MatrixXd a = Eigen::Vector3d(2, 1, 1).asDiagonal();
  DenseOracle oracle(a);
  SUBCASE("exact reproduction gives zero") {
    LowRankApprox approx;
    approx.factor = Eigen::MatrixXd::Zero(3, 3);
    approx.factor(0, 0) = std::sqrt(2.0);
    approx.factor(1, 1) = 1.0;
    approx.factor(2, 2) = 1.0;
    approx.pivots = {0, 1, 2};
    CHECK(relative_trace_error(oracle, approx) == doctest::Approx(0.0));
  }
  SUBCASE("empty factor gives one") {
    LowRankApprox approx;
    approx.factor = Eigen::MatrixXd::Zero(3, 0);
    CHECK(relative_trace_error(oracle, approx) == 1.0);
  }
  SUBCASE("first-pivot column on diag(2,1,1) gives one half") {
    LowRankApprox approx;
    approx.factor = Eigen::MatrixXd::Zero(3, 1);
    approx.factor(0, 0) = std::sqrt(2.0);
    approx.pivots = {0};
    CHECK(relative_trace_error(oracle, approx) == doctest::Approx(0.5));
  }
}

TEST_CASE("rejection sampling sweep") {
  SUBCASE("single proposal is always accepted") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      SplitMix64 rng(seed);
      Eigen::MatrixXd h(1, 1);
      h << 0.37;
      IndexList proposals{5};
      RejectionSample out = rejection_sample_submatrix(h, proposals, rng);
      REQUIRE(out.accepted.size() == 1);
      CHECK(out.accepted[0] == 5);
      CHECK(out.chol_factor(0, 0) == doctest::Approx(std::sqrt(0.37)));
    }
  }
  SUBCASE("duplicated proposal is never accepted twice") {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      SplitMix64 rng(seed);
      Eigen::MatrixXd h(2, 2);
      h << 2.0, 2.0, 2.0, 2.0;  // rank-1 block for proposals {s, s}
      IndexList proposals{3, 3};
      RejectionSample out = rejection_sample_submatrix(h, proposals, rng);
      CHECK(out.accepted.size() == 1);
    }
  }
  SUBCASE("diagonal block accepts every distinct proposal") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      SplitMix64 rng(seed);
      Eigen::MatrixXd h = Eigen::Vector3d(0.5, 1.5, 0.25).asDiagonal();
      IndexList proposals{0, 1, 2};
      RejectionSample out = rejection_sample_submatrix(h, proposals, rng);
      CHECK(out.accepted.size() == 3);
    }
  }
  SUBCASE("consumes one draw per proposal even when rejecting") {
    SplitMix64 rng_a(77), rng_b(77);
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 1.0, 1.0, 1.0;
    IndexList proposals{0, 0};
    (void)rejection_sample_submatrix(h, proposals, rng_a);
    rng_b.next_double();
    rng_b.next_double();
    CHECK(rng_a.next_u64() == rng_b.next_u64());
  }
}

TEST_CASE("block rpcholesky with b = 1 matches simple rpcholesky pivots") {
  SplitMix64 rng(4);
  Eigen::MatrixXd a = rt::random_psd(15, 15, rng);
  DenseOracle oracle(a);
  const std::uint64_t seed = 31;
  CholeskyResult simple = simple_rpcholesky(oracle, 6, seed);
  CholeskyResult block = block_rpcholesky(oracle, RunConfig::until_rank(6, 1, seed));
  CHECK(simple.approx.pivots == block.approx.pivots);
  CHECK((simple.approx.factor - block.approx.factor).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block rpcholesky retains the unique set of each round's proposals") {
  SplitMix64 rng(5);
  Eigen::MatrixXd a = rt::random_psd(6, 6, rng);
  a.diagonal().array() += 0.1;
  DenseOracle oracle(a);
  // Small N and large b make duplicate proposals frequent.
  CholeskyResult res = block_rpcholesky(oracle, RunConfig::fixed_rounds(2, 5, 17));
  bool saw_duplicate = false;
  for (const auto& round : res.trace.rounds) {
    IndexList expect(round.proposed.begin(), round.proposed.end());
    std::sort(expect.begin(), expect.end());
    if (std::adjacent_find(expect.begin(), expect.end()) != expect.end()) {
      saw_duplicate = true;
    }
    expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
    CHECK(round.accepted == expect);
  }
  CHECK(saw_duplicate);  // otherwise the case tested nothing
}

TEST_CASE("block rpcholesky eliminates exactly the pivoted diagonal entries") {
  // Diagonal of perfect squares, so the trace identity is exact in floating
  // point.
  Eigen::VectorXd diag(6);
  diag << 4, 1, 9, 16, 25, 36;
  Eigen::MatrixXd a = diag.asDiagonal();
  DenseOracle oracle(a);
  CholeskyResult res = block_rpcholesky(oracle, RunConfig::fixed_rounds(1, 3, 23));
  double removed = 0.0;
  for (Eigen::Index s : res.approx.pivots) removed += diag[s];
  const double resid = a.trace() - res.approx.factor.squaredNorm();
  CHECK(resid == a.trace() - removed);
}

TEST_CASE("accelerated rpcholesky with b = 1 accepts every proposal") {
  SplitMix64 rng(6);
  Eigen::MatrixXd a = rt::random_psd(20, 20, rng);
  a.diagonal().array() += 0.2;
  DenseOracle oracle(a);
  CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(15, 1, 101));
  for (const auto& round : res.trace.rounds) {
    CHECK(round.accepted.size() == 1);
  }
  CHECK(res.approx.rank() == 15);
}

TEST_CASE("accelerated rpcholesky reaches exact-rank termination") {
  SplitMix64 rng(7);
  for (Eigen::Index r = 1; r <= 4; ++r) {
    Eigen::MatrixXd a = rt::random_psd(16, r, rng);
    DenseOracle oracle(a);
    // The matrix has exact rank r (dense eigensolver confirms).
    Eigen::VectorXd evals = rt::eigenvalues_desc(a);
    CHECK(evals[r - 1] > 1e-8 * a.trace());
    if (r < 16) CHECK(evals[r] < 1e-10 * a.trace());
    CholeskyResult res =
        accelerated_rpcholesky(oracle, RunConfig::until_rank(r, 2, 55 + static_cast<std::uint64_t>(r)));
    CHECK(relative_trace_error(oracle, res.approx) <= 1e-9);
  }
}

TEST_CASE("accelerated rpcholesky always accepts the first proposal of a round") {
  SplitMix64 rng(8);
  Eigen::MatrixXd a = rt::random_psd(24, 24, rng);
  DenseOracle oracle(a);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(5, 4, seed));
    for (const auto& round : res.trace.rounds) {
      CHECK(round.accepted.size() >= 1);
    }
  }
}

TEST_CASE("accepted pivots are always distinct") {
  SplitMix64 rng(9);
  Eigen::MatrixXd a = rt::random_psd(12, 12, rng);
  DenseOracle oracle(a);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::until_rank(10, 3, seed));
    std::set<Eigen::Index> unique(res.approx.pivots.begin(), res.approx.pivots.end());
    CHECK(unique.size() == res.approx.pivots.size());
  }
}

TEST_CASE("until-rank mode keeps the final round's surplus pivots") {
  SplitMix64 rng(10);
  Eigen::MatrixXd a = rt::random_psd(40, 40, rng);
  a.diagonal().array() += 0.5;
  DenseOracle oracle(a);
  bool saw_surplus = false;
  for (std::uint64_t seed = 0; seed < 40 && !saw_surplus; ++seed) {
    CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::until_rank(9, 4, seed));
    CHECK(res.approx.rank() >= 9);
    if (res.approx.rank() > 9) {
      saw_surplus = true;
      CHECK(res.trace.surplus == res.approx.rank() - 9);
    }
  }
  CHECK(saw_surplus);
}

TEST_CASE("low-memory single round with b = 1") {
  SplitMix64 rng(11);
  Eigen::MatrixXd a = rt::random_psd(9, 9, rng);
  DenseOracle oracle(a);
  LowMemResult res = accelerated_rpcholesky_lowmem(oracle, RunConfig::fixed_rounds(1, 1, 77));
  REQUIRE(res.pivots.size() == 1);
  const Eigen::Index s = res.pivots[0];
  CHECK(res.chol_factor.rows() == 1);
  CHECK(res.chol_factor(0, 0) == doctest::Approx(std::sqrt(a(s, s))));
}

TEST_CASE("low-memory implementation tracks the standard one exactly") {
  SplitMix64 rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd a = rt::random_psd(32, 32, rng);
    DenseOracle oracle(a);
    RunConfig cfg = RunConfig::fixed_rounds(6, 4, 1000 + static_cast<std::uint64_t>(rep));
    CholeskyResult standard = accelerated_rpcholesky(oracle, cfg);
    LowMemResult lowmem = accelerated_rpcholesky_lowmem(oracle, cfg);
    REQUIRE(standard.approx.pivots == lowmem.pivots);
    CHECK((standard.residual_diag - lowmem.residual_diag).cwiseAbs().maxCoeff() <= 1e-8);
    // Implicit and explicit reconstructions coincide.
    Eigen::MatrixXd from_lowmem = reconstruct_lowmem(a, lowmem);
    Eigen::MatrixXd from_standard = reconstruct(standard.approx);
    CHECK((from_lowmem - from_standard).cwiseAbs().maxCoeff() <= 1e-8 * a.trace());
  }
}

TEST_CASE("rbrp accepts the single proposal when b = 1") {
  SplitMix64 rng(13);
  Eigen::MatrixXd a = rt::random_psd(10, 10, rng);
  DenseOracle oracle(a);
  CholeskyResult res = rbrp_cholesky(oracle, RunConfig::fixed_rounds(4, 1, 5));
  for (const auto& round : res.trace.rounds) {
    CHECK(round.accepted.size() == 1);
  }
}

TEST_CASE("rbrp stops after one pivot on orthogonal equal-norm columns") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  DenseOracle oracle(a);
  bool tested = false;
  for (std::uint64_t seed = 0; seed < 64 && !tested; ++seed) {
    CholeskyResult res = rbrp_cholesky(oracle, RunConfig::fixed_rounds(1, 2, seed));
    const auto& round = res.trace.rounds.at(0);
    IndexList sorted(round.proposed.begin(), round.proposed.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != IndexList{0, 1}) continue;
    tested = true;
    // Eliminating either column halves ||G||_F^2, meeting the threshold.
    CHECK(round.accepted.size() == 1);
  }
  CHECK(tested);
}

TEST_CASE("psd residual and trace identity for every algorithm") {
  SplitMix64 rng(14);
  for (int rep = 0; rep < 8; ++rep) {
    Eigen::MatrixXd a = rt::random_psd(24, 24, rng);
    DenseOracle oracle(a);
    const double tr = a.trace();
    const std::uint64_t seed = 500 + static_cast<std::uint64_t>(rep);
    std::vector<LowRankApprox> approxes;
    approxes.push_back(simple_rpcholesky(oracle, 10, seed).approx);
    approxes.push_back(block_rpcholesky(oracle, RunConfig::until_rank(10, 3, seed)).approx);
    approxes.push_back(accelerated_rpcholesky(oracle, RunConfig::until_rank(10, 3, seed)).approx);
    approxes.push_back(rbrp_cholesky(oracle, RunConfig::until_rank(10, 3, seed)).approx);
    for (const auto& approx : approxes) {
      Eigen::MatrixXd residual = a - reconstruct(approx);
      CHECK(rt::min_eigenvalue(residual) >= -1e-8 * tr);
      CHECK(std::abs(residual.trace() - (tr - approx.factor.squaredNorm())) <= 1e-9 * tr);
      // Interpolation: pivot rows/columns of the residual are annihilated.
      for (Eigen::Index s : approx.pivots) {
        CHECK(std::abs(residual(s, s)) <= 1e-8 * tr);
      }
      // Stored Cholesky factor reproduces A(S, S).
      const Eigen::Index k = approx.rank();
      Eigen::MatrixXd ass(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
          ass(i, j) = a(approx.pivots[static_cast<std::size_t>(i)],
                        approx.pivots[static_cast<std::size_t>(j)]);
        }
      }
      CHECK((approx.chol_factor * approx.chol_factor.transpose() - ass)
                .cwiseAbs()
                .maxCoeff() <= 1e-8 * tr);
    }
  }
}

TEST_CASE("residual diagonal invariants") {
  SplitMix64 rng(15);
  Eigen::MatrixXd a = rt::random_psd(20, 20, rng);
  DenseOracle oracle(a);
  const double tr = a.trace();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::until_rank(8, 4, seed));
    CHECK((res.residual_diag.array() >= 0.0).all());
    CHECK(((res.residual_diag - a.diagonal()).array() <= 1e-8 * tr).all());
  }
}

TEST_CASE("relative trace error is non-increasing across rounds") {
  SplitMix64 rng(16);
  Eigen::MatrixXd a = rt::random_psd(24, 24, rng);
  DenseOracle oracle(a);
  // Under the shared RNG contract, a run with fewer rounds is a prefix of a
  // longer run with the same seed.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    double last = 1.0;
    for (Eigen::Index t = 1; t <= 6; ++t) {
      CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(t, 3, seed));
      const double err = relative_trace_error(oracle, res.approx);
      CHECK(err <= last + 1e-10);
      last = err;
    }
  }
}

TEST_CASE("accelerated rounds consume the documented stream layout") {
  // Per round: exactly b proposal draws against the cumulative sums of the
  // tracked diagonal, then exactly b accept/reject draws in sweep order.
  // Replaying that layout by hand must reproduce the first round.
  SplitMix64 rng(18);
  Eigen::MatrixXd a = rt::random_psd(12, 12, rng);
  DenseOracle oracle(a);
  const Eigen::Index b = 4;
  const std::uint64_t seed = 4242;
  CholeskyResult res = accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(2, b, seed));

  SplitMix64 replay(seed);
  Eigen::VectorXd u = a.diagonal();
  Eigen::VectorXd cumsum = cumulative_sums(u);
  IndexList proposed;
  for (Eigen::Index j = 0; j < b; ++j) proposed.push_back(sample_discrete(cumsum, replay));
  CHECK(proposed == res.trace.rounds.at(0).proposed);
  Eigen::MatrixXd h = oracle.submatrix(proposed, proposed);
  RejectionSample sel = rejection_sample_submatrix(h, proposed, replay);
  CHECK(sel.accepted == res.trace.rounds.at(0).accepted);

  // The second round's proposals continue from the same stream.
  Eigen::MatrixXd g = oracle.columns(sel.accepted);
  detail::right_solve_lower_transposed(sel.chol_factor, g);
  u -= g.rowwise().squaredNorm();
  u = u.cwiseMax(0.0);
  cumsum = cumulative_sums(u);
  IndexList proposed2;
  for (Eigen::Index j = 0; j < b; ++j) proposed2.push_back(sample_discrete(cumsum, replay));
  CHECK(proposed2 == res.trace.rounds.at(1).proposed);
}

TEST_CASE("stop_tol exits early once the target error is reached") {
  SplitMix64 rng(17);
  Eigen::MatrixXd a = rt::random_psd(30, 30, rng);
  DenseOracle oracle(a);
  RunConfig cfg = RunConfig::until_rank(30, 5, 9);
  cfg.stop_tol = 0.2;
  CholeskyResult res = accelerated_rpcholesky(oracle, cfg);
  CHECK(relative_trace_error(oracle, res.approx) <= 0.2);
  CHECK(res.approx.rank() < 30);
}
