/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_DATA_MATRIX_HPP
#define RPCHOL_DATA_MATRIX_HPP

#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace rpchol {

/// N x d point set, one data point per row.  Entries must be finite.
class DataMatrix {
 public:
  explicit DataMatrix(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
      throw std::invalid_argument("DataMatrix: need at least one point and one dimension");
    }
    if (!points_.allFinite()) {
      throw std::invalid_argument("DataMatrix: non-finite entry");
    }
  }

  const Eigen::MatrixXd& points() const noexcept { return points_; }
  Eigen::Index n_points() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }

 private:
  Eigen::MatrixXd points_;
};

}  // namespace rpchol

#endif  // RPCHOL_DATA_MATRIX_HPP
