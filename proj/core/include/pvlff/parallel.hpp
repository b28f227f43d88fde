// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pvlff {

// Fixed-size thread pool used for all data parallelism in the library.
//
// Determinism contract: work is always partitioned into chunks whose
// boundaries depend only on the problem size, never on the thread count.
// Each chunk writes to a disjoint output region (or results are reduced
// serially in chunk order), so any --threads setting produces bit-identical
// results.
class ThreadPool {
 public:
  // n_threads == 1 runs everything inline on the calling thread.
  explicit ThreadPool(std::size_t n_threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t thread_count() const { return n_threads_; }

  // Runs fn(chunk_index, begin, end) over [0, total) split into chunks of
  // `chunk` elements. Blocks until all chunks finish. Chunks may execute in
  // any order and on any thread; callers must keep outputs disjoint.
  void for_chunks(std::size_t total, std::size_t chunk,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

  // Global pool configured once by the CLI / test harness; defaults to 1.
  static ThreadPool& global();
  static void set_global_threads(std::size_t n_threads);

 private:
  struct Impl;
  Impl* impl_;
  std::size_t n_threads_;
};

// Number of chunks of size `chunk` covering `total` elements.
inline std::size_t chunk_count(std::size_t total, std::size_t chunk) {
  return (total + chunk - 1) / chunk;
}

}  // namespace pvlff
