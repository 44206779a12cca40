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

#include <cstdio>
#include <fstream>

#include "rpchol/datasets.hpp"
#include "rpchol/io.hpp"
#include "test_support.hpp"

using namespace rpchol;
namespace rt = rpchol::testing;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/rpchol_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("dataset generation is deterministic given the seed") {
  DatasetSpec spec = DatasetSpec::gaussian_cloud(100, 2, 42);
  DataMatrix a = generate_dataset(spec);
  DataMatrix b = generate_dataset(spec);
  CHECK((a.points().array() == b.points().array()).all());
  DatasetSpec other = DatasetSpec::gaussian_cloud(100, 2, 43);
  CHECK((generate_dataset(other).points() - a.points()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("smile points stay inside the jittered disk") {
  for (std::uint64_t seed : {0ull, 9ull, 123ull}) {
    DatasetSpec spec = DatasetSpec::smile(500, 10.0, 0.08, seed);
    DataMatrix data = generate_dataset(spec);
    const double bound = 10.0 + 4.0 * 0.08;
    for (Eigen::Index i = 0; i < data.n_points(); ++i) {
      CHECK(data.points().row(i).norm() <= bound);
    }
  }
}

TEST_CASE("smile mixes dense eye clusters with a sparser grin arc") {
  DataMatrix data = generate_dataset(DatasetSpec::smile(1000, 10.0, 0.05, 7));
  Eigen::Vector2d eye1(-4.0, 3.5), eye2(4.0, 3.5);
  Eigen::Index near_eyes = 0, on_arc = 0;
  for (Eigen::Index i = 0; i < data.n_points(); ++i) {
    Eigen::Vector2d p = data.points().row(i).transpose();
    if ((p - eye1).norm() < 1.0 || (p - eye2).norm() < 1.0) ++near_eyes;
    if (std::abs(p.norm() - 9.0) < 1e-9) ++on_arc;
  }
  CHECK(near_eyes == 600);
  CHECK(on_arc == 400);
}

TEST_CASE("spiral stays within its scaled radius") {
  DataMatrix data = generate_dataset(DatasetSpec::spiral(400, 3.0, 2.0, 5));
  for (Eigen::Index i = 0; i < data.n_points(); ++i) {
    CHECK(data.points().row(i).norm() <= 2.0 * 10.0 + 1e-12);
  }
}

TEST_CASE("outlier cloud shifts exactly the requested number of points") {
  const Eigen::Index n = 1000, n_out = 50;
  const double shift = 20.0;
  DataMatrix data = generate_dataset(DatasetSpec::outlier_cloud(n, 20, n_out, shift, 11));
  // The generator shifts the final n_out points; the bulk mean comes from the
  // untouched prefix.
  Eigen::RowVectorXd bulk_mean =
      data.points().topRows(n - n_out).colwise().mean();
  Eigen::Index far = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((data.points().row(i) - bulk_mean).norm() > shift / 2.0) ++far;
  }
  CHECK(far == n_out);
}

TEST_CASE("points csv round trip") {
  SplitMix64 rng(51);
  Eigen::MatrixXd pts = rt::random_dense(20, 3, rng);
  TempFile file("points.csv");
  write_points_csv(file.path, pts);
  DataMatrix back = read_points_csv(file.path);
  CHECK((back.points() - pts).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("header flag skips one line") {
    std::ofstream os(file.path);
    os << "x,y,z\n1,2,3\n4,5,6\n";
    os.close();
    DataMatrix with_header = read_points_csv(file.path, true);
    CHECK(with_header.n_points() == 2);
    CHECK(with_header.points()(1, 2) == 6.0);
  }
  SUBCASE("ragged rows are rejected") {
    std::ofstream os(file.path);
    os << "1,2\n3\n";
    os.close();
    CHECK_THROWS_AS((void)read_points_csv(file.path), std::runtime_error);
  }
}

TEST_CASE("libsvm reader converts 1-based sparse rows to dense points") {
  TempFile file("data.libsvm");
  std::ofstream os(file.path);
  os << "1.5 1:0.25 3:-2\n";
  os << "-1 2:7\n";
  os.close();
  LabeledPoints lp = read_libsvm(file.path);
  CHECK(lp.points.n_points() == 2);
  CHECK(lp.points.dim() == 3);
  CHECK(lp.labels[0] == 1.5);
  CHECK(lp.labels[1] == -1.0);
  CHECK(lp.points.points()(0, 0) == 0.25);
  CHECK(lp.points.points()(0, 2) == -2.0);
  CHECK(lp.points.points()(1, 1) == 7.0);
  CHECK(lp.points.points()(1, 0) == 0.0);
}

TEST_CASE("rpcf factor file round trip") {
  SplitMix64 rng(52);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 20);
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.next_u64() % n);
    LowRankApprox approx;
    approx.factor = rt::random_dense(n, k, rng);
    approx.pivots = sample_without_replacement(n, k, rng);
    if (rep % 2 == 0) {
      Eigen::MatrixXd l = rt::random_dense(k, k, rng);
      approx.chol_factor = l.triangularView<Eigen::Lower>();
    }
    TempFile file("factor.rpcf");
    write_rpcf(file.path, approx);
    LowRankApprox back = read_rpcf(file.path);
    CHECK((back.factor.array() == approx.factor.array()).all());
    CHECK(back.pivots == approx.pivots);
    if (rep % 2 == 0) {
      CHECK((back.chol_factor.array() == approx.chol_factor.array()).all());
    } else {
      CHECK(back.chol_factor.size() == 0);
    }
  }
}

TEST_CASE("rpqf dense matrix round trip") {
  SplitMix64 rng(53);
  Eigen::MatrixXd m = rt::random_dense(7, 4, rng);
  TempFile file("matrix.rpqf");
  write_rpqf(file.path, m);
  Eigen::MatrixXd back = read_rpqf(file.path);
  CHECK((back.array() == m.array()).all());

  SUBCASE("wrong magic is rejected") {
    write_rpcf(file.path, LowRankApprox{Eigen::MatrixXd::Zero(2, 1), {0}, {}});
    CHECK_THROWS_AS((void)read_rpqf(file.path), std::runtime_error);
  }
}

TEST_CASE("pivot trace csv uses the pinned schema") {
  PivotTrace trace;
  trace.rounds.push_back({{1, 2, 2}, {1, 2}, {}});
  trace.rounds.push_back({{0, 0}, {0}, {}});
  TempFile file("trace.csv");
  write_pivot_trace_csv(file.path, trace);
  std::ifstream is(file.path);
  std::string header, row0;
  std::getline(is, header);
  std::getline(is, row0);
  CHECK(header == "round,proposed,accepted,acceptance_rate");
  CHECK(row0.rfind("0,3,2,", 0) == 0);
}

TEST_CASE("krr sidecar round trip") {
  KrrModelMeta meta;
  meta.kernel = KernelKind::Matern52;
  meta.sigma = 2.25;
  meta.mu = 1e-7;
  meta.target_mean = -3.5;
  meta.coefficients = Eigen::Vector3d(0.1, -0.2, 0.3);
  TempFile file("model.csv");
  write_krr_sidecar(file.path, meta);
  KrrModelMeta back = read_krr_sidecar(file.path);
  CHECK(back.kernel == KernelKind::Matern52);
  CHECK(back.sigma == meta.sigma);
  CHECK(back.mu == meta.mu);
  CHECK(back.target_mean == meta.target_mean);
  CHECK((back.coefficients.array() == meta.coefficients.array()).all());
}

TEST_CASE("vector csv round trip") {
  Eigen::VectorXd v(4);
  v << 1.5, -2.25, 3.125, 1e-17;
  TempFile file("vec.csv");
  write_vector_csv(file.path, v);
  Eigen::VectorXd back = read_vector_csv(file.path);
  CHECK((back.array() == v.array()).all());
}
