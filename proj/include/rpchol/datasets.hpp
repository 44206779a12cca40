/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_DATASETS_HPP
#define RPCHOL_DATASETS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rpchol/data_matrix.hpp"
#include "rpchol/io.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

/// Synthetic dataset descriptions plus a from-file escape hatch.  Generation
/// is deterministic given (spec, seed).
struct DatasetSpec {
  enum class Kind { Smile, Spiral, OutlierCloud, GaussianCloud, FromFile };
  enum class FileFormat { Csv, CsvHeader, Libsvm };

  Kind kind = Kind::GaussianCloud;
  Eigen::Index n_points = 0;
  std::uint64_t seed = 0;

  // Smile.
  double radius = 10.0;
  double noise = 0.05;

  // Spiral.
  double turns = 3.0;
  double scale = 1.0;

  // Clouds.
  Eigen::Index dim = 2;
  Eigen::Index n_outliers = 0;
  double shift = 0.0;

  // FromFile.
  std::string path;
  FileFormat format = FileFormat::Csv;

  static DatasetSpec smile(Eigen::Index n, double radius, double noise,
                           std::uint64_t seed) {
    DatasetSpec s;
    s.kind = Kind::Smile;
    s.n_points = n;
    s.radius = radius;
    s.noise = noise;
    s.seed = seed;
    return s;
  }
  static DatasetSpec spiral(Eigen::Index n, double turns, double scale,
                            std::uint64_t seed) {
    DatasetSpec s;
    s.kind = Kind::Spiral;
    s.n_points = n;
    s.turns = turns;
    s.scale = scale;
    s.seed = seed;
    return s;
  }
  static DatasetSpec outlier_cloud(Eigen::Index n, Eigen::Index dim,
                                   Eigen::Index n_outliers, double shift,
                                   std::uint64_t seed) {
    DatasetSpec s;
    s.kind = Kind::OutlierCloud;
    s.n_points = n;
    s.dim = dim;
    s.n_outliers = n_outliers;
    s.shift = shift;
    s.seed = seed;
    return s;
  }
  static DatasetSpec gaussian_cloud(Eigen::Index n, Eigen::Index dim,
                                    std::uint64_t seed) {
    DatasetSpec s;
    s.kind = Kind::GaussianCloud;
    s.n_points = n;
    s.dim = dim;
    s.seed = seed;
    return s;
  }
  static DatasetSpec from_file(const std::string& path, FileFormat format) {
    DatasetSpec s;
    s.kind = Kind::FromFile;
    s.n_points = 1;  // determined by the file
    s.path = path;
    s.format = format;
    return s;
  }
};

namespace detail {

/// Gaussian jitter truncated at 4 standard deviations (resampled), so every
/// generated point stays within a known disk.
inline Eigen::Vector2d truncated_jitter2d(SplitMix64& rng, double sigma) {
  if (sigma <= 0.0) return Eigen::Vector2d::Zero();
  for (;;) {
    Eigen::Vector2d j(sigma * sample_standard_normal(rng),
                      sigma * sample_standard_normal(rng));
    if (j.norm() <= 4.0 * sigma) return j;
  }
}

/// Two dense eye clusters plus a grin arc hugging the face outline.  The eyes
/// carry 60% of the points in truncated-Gaussian dots; the arc carries the
/// rest at exponentially decaying density along its length, so its structure
/// is revealed a few length scales at a time.  The imbalance (redundant dense
/// clusters, progressively sparser curve) is the property the downstream
/// method comparisons rely on.
inline Eigen::MatrixXd make_smile(Eigen::Index n, double radius, double noise,
                                  SplitMix64& rng) {
  const Eigen::Index n_mouth = std::max<Eigen::Index>(1, (4 * n) / 10);
  const Eigen::Index n_eye1 = (n - n_mouth) / 2;
  const Eigen::Index n_eye2 = n - n_mouth - n_eye1;
  const Eigen::Vector2d eye1(-0.40 * radius, 0.35 * radius);
  const Eigen::Vector2d eye2(0.40 * radius, 0.35 * radius);
  Eigen::MatrixXd pts(n, 2);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n_eye1; ++i) {
    pts.row(row++) = (eye1 + truncated_jitter2d(rng, noise)).transpose();
  }
  for (Eigen::Index i = 0; i < n_eye2; ++i) {
    pts.row(row++) = (eye2 + truncated_jitter2d(rng, noise)).transpose();
  }
  // Grin: arc of radius 0.9 R spanning 300 degrees, centered on the chin.
  // Point placement is deterministic with density ratio e^10 from the dense
  // end to the sparse end.
  const double mid = 1.5 * std::numbers::pi;
  const double half = 300.0 * std::numbers::pi / 360.0;
  const double decay = 10.0;
  for (Eigen::Index i = 0; i < n_mouth; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n_mouth);
    const double frac =
        -std::log(1.0 - u * (1.0 - std::exp(-decay))) / decay;
    const double theta = mid - half + 2.0 * half * frac;
    pts.row(row++) = Eigen::RowVector2d(0.9 * radius * std::cos(theta),
                                        0.9 * radius * std::sin(theta));
  }
  return pts;
}

inline Eigen::MatrixXd make_spiral(Eigen::Index n, double turns, double scale,
                                   SplitMix64& rng) {
  const double theta_max = 2.0 * std::numbers::pi * turns;
  Eigen::MatrixXd pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = theta_max * rng.next_double();
    const double r = scale * 10.0 * theta / theta_max;
    pts(i, 0) = r * std::cos(theta);
    pts(i, 1) = r * std::sin(theta);
  }
  return pts;
}

inline Eigen::MatrixXd make_gaussian_cloud(Eigen::Index n, Eigen::Index dim,
                                           SplitMix64& rng) {
  Eigen::MatrixXd pts(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      pts(i, j) = sample_standard_normal(rng);
    }
  }
  return pts;
}

}  // namespace detail

inline DataMatrix generate_dataset(const DatasetSpec& spec) {
  if (spec.kind == DatasetSpec::Kind::FromFile) {
    switch (spec.format) {
      case DatasetSpec::FileFormat::Csv:
        return read_points_csv(spec.path, false);
      case DatasetSpec::FileFormat::CsvHeader:
        return read_points_csv(spec.path, true);
      case DatasetSpec::FileFormat::Libsvm:
        return std::move(read_libsvm(spec.path).points);
    }
    throw std::invalid_argument("generate_dataset: unknown file format");
  }
  if (spec.n_points < 1) {
    throw std::invalid_argument("generate_dataset: n_points must be >= 1");
  }
  SplitMix64 rng(spec.seed);
  switch (spec.kind) {
    case DatasetSpec::Kind::Smile:
      return DataMatrix(detail::make_smile(spec.n_points, spec.radius, spec.noise, rng));
    case DatasetSpec::Kind::Spiral:
      return DataMatrix(detail::make_spiral(spec.n_points, spec.turns, spec.scale, rng));
    case DatasetSpec::Kind::GaussianCloud:
      return DataMatrix(detail::make_gaussian_cloud(spec.n_points, spec.dim, rng));
    case DatasetSpec::Kind::OutlierCloud: {
      if (spec.n_outliers > spec.n_points) {
        throw std::invalid_argument("generate_dataset: more outliers than points");
      }
      Eigen::MatrixXd pts = detail::make_gaussian_cloud(spec.n_points, spec.dim, rng);
      // The last n_outliers points are shifted along random unit directions.
      for (Eigen::Index i = spec.n_points - spec.n_outliers; i < spec.n_points; ++i) {
        Eigen::VectorXd dir(spec.dim);
        do {
          for (Eigen::Index j = 0; j < spec.dim; ++j) {
            dir[j] = sample_standard_normal(rng);
          }
        } while (dir.norm() == 0.0);
        pts.row(i) += (spec.shift / dir.norm()) * dir.transpose();
      }
      return DataMatrix(std::move(pts));
    }
    default:
      throw std::invalid_argument("generate_dataset: unknown dataset kind");
  }
}

}  // namespace rpchol

#endif  // RPCHOL_DATASETS_HPP
