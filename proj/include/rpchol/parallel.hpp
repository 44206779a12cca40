/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_PARALLEL_HPP
#define RPCHOL_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rpchol {

/// Runs f(task) for task = 0..n_tasks-1 on up to n_threads workers.
/// Task boundaries are fixed by the caller, so results written per task are
/// identical regardless of the worker count.
template <typename F>
void parallel_for(std::ptrdiff_t n_tasks, int n_threads, F&& f) {
  if (n_tasks <= 0) return;
  if (n_threads <= 1 || n_tasks == 1) {
    for (std::ptrdiff_t t = 0; t < n_tasks; ++t) f(t);
    return;
  }
  const int workers =
      static_cast<int>(std::min<std::ptrdiff_t>(n_threads, n_tasks));
  std::atomic<std::ptrdiff_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const std::ptrdiff_t t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        f(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rpchol

#endif  // RPCHOL_PARALLEL_HPP
