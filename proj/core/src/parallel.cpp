// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#include "pvlff/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "pvlff/errors.hpp"

namespace pvlff {

struct ThreadPool::Impl {
  std::vector<std::thread> workers;
  std::mutex mu;
  std::condition_variable cv_work;
  std::condition_variable cv_done;
  bool stop = false;

  // Current batch: chunks are claimed by atomic counter; completion is
  // tracked so for_chunks can block until the batch drains.
  const std::function<void(std::size_t, std::size_t, std::size_t)>* fn = nullptr;
  std::size_t total = 0;
  std::size_t chunk = 0;
  std::size_t n_chunks = 0;
  std::atomic<std::size_t> next_chunk{0};
  std::size_t done_chunks = 0;
  std::uint64_t batch_id = 0;

  void worker_loop() {
    std::uint64_t seen_batch = 0;
    while (true) {
      {
        std::unique_lock<std::mutex> lock(mu);
        cv_work.wait(lock, [&] { return stop || batch_id != seen_batch; });
        if (stop) return;
        seen_batch = batch_id;
      }
      run_chunks(seen_batch);
    }
  }

  void run_chunks(std::uint64_t my_batch) {
    std::size_t finished = 0;
    while (true) {
      std::size_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      std::size_t b = c * chunk;
      std::size_t e = std::min(total, b + chunk);
      (*fn)(c, b, e);
      ++finished;
    }
    if (finished > 0) {
      std::lock_guard<std::mutex> lock(mu);
      if (batch_id == my_batch) {
        done_chunks += finished;
        if (done_chunks == n_chunks) cv_done.notify_all();
      }
    }
  }
};

ThreadPool::ThreadPool(std::size_t n_threads) : impl_(new Impl), n_threads_(n_threads == 0 ? 1 : n_threads) {
  for (std::size_t i = 0; i + 1 < n_threads_; ++i) {
    impl_->workers.emplace_back([this] { impl_->worker_loop(); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->stop = true;
  }
  impl_->cv_work.notify_all();
  for (auto& w : impl_->workers) w.join();
  delete impl_;
}

void ThreadPool::for_chunks(std::size_t total, std::size_t chunk,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  PVLFF_CHECK(chunk > 0, "ThreadPool::for_chunks: chunk size must be positive");
  if (total == 0) return;
  std::size_t n_chunks = chunk_count(total, chunk);
  if (n_threads_ == 1 || n_chunks == 1 || impl_->workers.empty()) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      std::size_t b = c * chunk;
      fn(c, b, std::min(total, b + chunk));
    }
    return;
  }
  std::uint64_t my_batch;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->fn = &fn;
    impl_->total = total;
    impl_->chunk = chunk;
    impl_->n_chunks = n_chunks;
    impl_->next_chunk.store(0);
    impl_->done_chunks = 0;
    my_batch = ++impl_->batch_id;
  }
  impl_->cv_work.notify_all();
  // The calling thread participates too.
  impl_->run_chunks(my_batch);
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->cv_done.wait(lock, [&] { return impl_->done_chunks == impl_->n_chunks; });
  impl_->fn = nullptr;
}

namespace {
std::unique_ptr<ThreadPool> g_pool;
}  // namespace

ThreadPool& ThreadPool::global() {
  if (!g_pool) g_pool = std::make_unique<ThreadPool>(1);
  return *g_pool;
}

void ThreadPool::set_global_threads(std::size_t n_threads) {
  g_pool = std::make_unique<ThreadPool>(n_threads);
}

}  // namespace pvlff
