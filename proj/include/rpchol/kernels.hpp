/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_KERNELS_HPP
#define RPCHOL_KERNELS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rpchol {

enum class KernelKind { Gaussian, L1Laplace, Matern32, Matern52 };

inline std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::L1Laplace: return "l1laplace";
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
  }
  throw std::invalid_argument("unknown kernel kind");
}

inline KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "l1laplace" || name == "laplace") return KernelKind::L1Laplace;
  if (name == "matern32") return KernelKind::Matern32;
  if (name == "matern52") return KernelKind::Matern52;
  throw std::invalid_argument("unknown kernel: " + name);
}

/// Kernel kind plus bandwidth sigma > 0.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double bandwidth = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelKind k, double sigma) : kind(k), bandwidth(sigma) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw std::invalid_argument("KernelSpec: bandwidth must be positive");
    }
  }
};

/// True for kernels of the form phi(||x - x'||_2), which admit the blocked
/// inner-product evaluation path.
inline bool is_l2_translation_invariant(KernelKind kind) noexcept {
  return kind != KernelKind::L1Laplace;
}

/// kappa value from a squared Euclidean distance (l2 kernels only).
inline double kernel_from_sq_dist(const KernelSpec& spec, double sq_dist) {
  const double sigma = spec.bandwidth;
  switch (spec.kind) {
    case KernelKind::Gaussian:
      return std::exp(-0.5 * sq_dist / (sigma * sigma));
    case KernelKind::Matern32: {
      const double rho = std::sqrt(sq_dist) / sigma;
      const double z = std::sqrt(3.0) * rho;
      return (1.0 + z) * std::exp(-z);
    }
    case KernelKind::Matern52: {
      const double rho2 = sq_dist / (sigma * sigma);
      const double z = std::sqrt(5.0 * rho2);
      return (1.0 + z + (5.0 / 3.0) * rho2) * std::exp(-z);
    }
    case KernelKind::L1Laplace:
      throw std::invalid_argument("L1 Laplace kernel is not a function of the l2 distance");
  }
  throw std::invalid_argument("unknown kernel kind");
}

/// Pointwise kernel evaluation kappa(x, y).  Result lies in (0, 1].
inline double eval_entry(const KernelSpec& spec,
                         const Eigen::Ref<const Eigen::RowVectorXd>& x,
                         const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("eval_entry: dimension mismatch");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("eval_entry: non-finite input");
  }
  if (spec.kind == KernelKind::L1Laplace) {
    return std::exp(-(x - y).cwiseAbs().sum() / spec.bandwidth);
  }
  return kernel_from_sq_dist(spec, (x - y).squaredNorm());
}

}  // namespace rpchol

#endif  // RPCHOL_KERNELS_HPP
