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

#include <map>
#include <vector>

#include "rpchol/bounds.hpp"
#include "rpchol/rpcholesky.hpp"
#include "test_support.hpp"

using namespace rpchol;
namespace rt = rpchol::testing;

namespace {

using Tuple = std::vector<Eigen::Index>;

/// Exact law of the first m simple-RPCholesky pivots on a diagonal matrix,
/// by enumeration over ordered tuples.
std::map<Tuple, double> simple_pivot_law_diag(const Eigen::VectorXd& diag,
                                              int m) {
  std::map<Tuple, double> law;
  const double total = diag.sum();
  std::function<void(Tuple&, double, double)> recurse =
      [&](Tuple& prefix, double prob, double remaining) {
        if (static_cast<int>(prefix.size()) == m) {
          law[prefix] += prob;
          return;
        }
        for (Eigen::Index j = 0; j < diag.size(); ++j) {
          if (std::find(prefix.begin(), prefix.end(), j) != prefix.end()) continue;
          prefix.push_back(j);
          recurse(prefix, prob * diag[j] / remaining, remaining - diag[j]);
          prefix.pop_back();
        }
      };
  Tuple prefix;
  recurse(prefix, 1.0, total);
  return law;
}

}  // namespace

TEST_CASE("simple rpcholesky expected residual trace on diag(2,1,1)") {
  Eigen::VectorXd diag(3);
  diag << 2, 1, 1;
  // Enumeration oracle: pivot s removes diag[s] from the trace.
  double expected = 0.0;
  for (Eigen::Index s = 0; s < 3; ++s) {
    expected += diag[s] / diag.sum() * (diag.sum() - diag[s]);
  }
  CHECK(expected == doctest::Approx(2.5));

  DenseOracle oracle(Eigen::MatrixXd(diag.asDiagonal()));
  const int trials = 100000;
  double mean = 0.0;
  for (int t = 0; t < trials; ++t) {
    CholeskyResult res = simple_rpcholesky(oracle, 1, static_cast<std::uint64_t>(t));
    mean += diag.sum() - res.approx.factor.squaredNorm();
  }
  mean /= trials;
  CHECK(std::abs(mean - expected) <= 0.02);
}

TEST_CASE("accelerated rpcholesky expected acceptance count on diag(2,1,1)") {
  Eigen::VectorXd diag(3);
  diag << 2, 1, 1;
  // Enumeration oracle over the 9 proposal pairs: the second proposal is
  // accepted exactly when it differs from the first.
  Eigen::VectorXd p = diag / diag.sum();
  double expected = 1.0 + (1.0 - p.squaredNorm());
  CHECK(expected == doctest::Approx(1.625));

  DenseOracle oracle(Eigen::MatrixXd(diag.asDiagonal()));
  const int trials = 100000;
  double mean = 0.0;
  for (int t = 0; t < trials; ++t) {
    CholeskyResult res =
        accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(1, 2, static_cast<std::uint64_t>(t)));
    mean += static_cast<double>(res.approx.rank());
  }
  mean /= trials;
  CHECK(std::abs(mean - expected) <= 0.01);
}

TEST_CASE("one-round acceptance matches its exact conditional law") {
  // diag(4, 2, 1, 1), b = 2.  Conditional on the number of acceptances m,
  // the exact law of the accepted tuple follows from enumerating the 16
  // proposal pairs: the first proposal is always accepted and the second is
  // accepted exactly when distinct.
  Eigen::VectorXd diag(4);
  diag << 4, 2, 1, 1;
  Eigen::VectorXd p = diag / diag.sum();
  const double p_dup = p.squaredNorm();
  std::map<Tuple, double> exact_m1, exact_m2;
  for (Eigen::Index i = 0; i < 4; ++i) {
    exact_m1[{i}] = p[i] * p[i] / p_dup;
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (i != j) exact_m2[{i, j}] = p[i] * p[j] / (1.0 - p_dup);
    }
  }

  DenseOracle oracle(Eigen::MatrixXd(diag.asDiagonal()));
  const int trials = 200000;
  std::map<Tuple, double> emp_m1, emp_m2;
  Eigen::Index n_m1 = 0, n_m2 = 0;
  for (int t = 0; t < trials; ++t) {
    CholeskyResult res =
        accelerated_rpcholesky(oracle, RunConfig::fixed_rounds(1, 2, static_cast<std::uint64_t>(t)));
    if (res.approx.pivots.size() == 1) {
      emp_m1[res.approx.pivots] += 1.0;
      ++n_m1;
    } else {
      REQUIRE(res.approx.pivots.size() == 2);
      emp_m2[res.approx.pivots] += 1.0;
      ++n_m2;
    }
  }
  for (auto& [k, v] : emp_m1) v /= static_cast<double>(n_m1);
  for (auto& [k, v] : emp_m2) v /= static_cast<double>(n_m2);
  CHECK(rt::tv_distance(emp_m1, exact_m1) <= 0.01);
  CHECK(rt::tv_distance(emp_m2, exact_m2) <= 0.01);
}

TEST_CASE("first accepted pivots follow the simple rpcholesky law") {
  // The sequence of accepted pivots, taken until the m-th acceptance across
  // however many rounds are needed, has exactly the law of m simple
  // RPCholesky pivots.
  Eigen::VectorXd diag(4);
  diag << 4, 2, 1, 1;
  DenseOracle oracle(Eigen::MatrixXd(diag.asDiagonal()));
  const int trials = 200000;

  for (int m : {2, 3}) {
    std::map<Tuple, double> exact = simple_pivot_law_diag(diag, m);
    std::map<Tuple, double> emp;
    for (int t = 0; t < trials; ++t) {
      CholeskyResult res = accelerated_rpcholesky(
          oracle, RunConfig::until_rank(m, 2, static_cast<std::uint64_t>(t) * 977 + 13));
      REQUIRE(res.approx.pivots.size() >= static_cast<std::size_t>(m));
      Tuple prefix(res.approx.pivots.begin(), res.approx.pivots.begin() + m);
      emp[prefix] += 1.0;
    }
    for (auto& [k, v] : emp) v /= static_cast<double>(trials);
    CHECK(rt::tv_distance(emp, exact) <= 0.01);
  }
}

TEST_CASE("expected residual eigenvalues dominated by the phi iterates") {
  // Desk-scale spectral domination: for diagonal psd matrices the residual
  // stays diagonal, so its eigenvalues are the tracked residual diagonal.
  SplitMix64 rng(2718);
  Eigen::VectorXd diag(16);
  for (Eigen::Index i = 0; i < 16; ++i) {
    diag[i] = std::abs(rt::random_dense(1, 1, rng)(0, 0)) + 0.05;
  }
  Eigen::VectorXd spectrum = diag;
  std::sort(spectrum.data(), spectrum.data() + spectrum.size(),
            [](double a, double b) { return a > b; });

  const Eigen::Index b = 2, t = 3;
  Eigen::VectorXd bound = phi_matrix_diag(spectrum, b, t);

  DenseOracle oracle(Eigen::MatrixXd(diag.asDiagonal()));
  const int trials = 4000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(16);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(16);
  for (int trial = 0; trial < trials; ++trial) {
    CholeskyResult res = accelerated_rpcholesky(
        oracle, RunConfig::fixed_rounds(t, b, static_cast<std::uint64_t>(trial)));
    mean += res.residual_diag;
    sum_sq += res.residual_diag.cwiseAbs2();
  }
  mean /= trials;
  Eigen::VectorXd se =
      ((sum_sq / trials - mean.cwiseAbs2()).cwiseMax(0.0) / trials).cwiseSqrt();
  const double se_max = se.maxCoeff();
  std::sort(mean.data(), mean.data() + mean.size(),
            [](double a, double b) { return a > b; });
  for (Eigen::Index i = 0; i < 16; ++i) {
    CHECK(mean[i] <= bound[i] + 3.0 * se_max + 1e-12);
  }
}
