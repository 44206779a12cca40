/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_RNG_HPP
#define RPCHOL_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rpchol {

/// Counter-based 64-bit generator (splitmix64 output function over an
/// incrementing counter).  Streams derived through split() are independent
/// of draws taken from the parent, which makes runs reproducible no matter
/// how work is divided between workers.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Derives an independent stream without consuming draws from *this.
  SplitMix64 split(std::uint64_t stream) const noexcept {
    std::uint64_t z = state_ ^ (0x9e3779b97f4a7c15ULL * (2 * stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return SplitMix64(z ^ (z >> 31));
  }

 private:
  std::uint64_t state_;
};

/// Standard normal via Box-Muller; consumes two uniform draws.
inline double sample_standard_normal(SplitMix64& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  // Guard against log(0).
  while (u1 <= 0.0) u1 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Inclusive prefix sums of a nonnegative weight vector.
inline Eigen::VectorXd cumulative_sums(const Eigen::VectorXd& weights) {
  Eigen::VectorXd cumsum(weights.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cumsum[i] = acc;
  }
  return cumsum;
}

/// Samples one index proportional to the weights encoded by their inclusive
/// prefix sums, by inverse-CDF binary search.  Consumes exactly one uniform
/// draw.  Zero-weight entries are never returned.
inline Eigen::Index sample_discrete(const Eigen::VectorXd& cumsum,
                                    SplitMix64& rng) {
  const Eigen::Index n = cumsum.size();
  if (n == 0) throw std::invalid_argument("sample_discrete: empty weights");
  const double total = cumsum[n - 1];
  if (!(total > 0.0)) {
    throw std::invalid_argument("sample_discrete: total weight must be > 0");
  }
  const double target = rng.next_double() * total;
  const double* begin = cumsum.data();
  Eigen::Index idx = static_cast<Eigen::Index>(
      std::upper_bound(begin, begin + n, target) - begin);
  if (idx >= n) idx = n - 1;
  // Walk off a trailing zero-weight plateau (can only be reached by rounding).
  while (idx > 0 && cumsum[idx] == cumsum[idx - 1]) --idx;
  return idx;
}

/// m distinct indices drawn uniformly from {0,...,n-1} by partial
/// Fisher-Yates.  Deterministic given the generator state.
inline std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n,
                                                            Eigen::Index m,
                                                            SplitMix64& rng) {
  if (m > n) throw std::invalid_argument("sample_without_replacement: m > n");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto remaining = static_cast<std::uint64_t>(n - i);
    const auto offset =
        static_cast<Eigen::Index>(rng.next_u64() % remaining);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(i + offset)]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

}  // namespace rpchol

#endif  // RPCHOL_RNG_HPP
