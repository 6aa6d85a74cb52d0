#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <latch>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gsgp/core.hpp"

namespace gsgp {

/// ceil(work_items / workers), never below 1.
constexpr std::size_t choose_chunk(std::size_t work_items, std::size_t workers) noexcept {
  if (workers == 0) workers = 1;
  return std::max<std::size_t>(1, (work_items + workers - 1) / workers);
}

struct BackendDescriptor {
  std::string name;
  std::size_t workers = 1;
  // Static partitioning: work is split into contiguous chunks of
  // choose_chunk(items, workers), one chunk per worker.
  std::string chunking = "static";
};

namespace detail {

// Fixed set of workers that execute one batch of range tasks at a time.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers) {
    threads_.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      threads_.emplace_back([this, w](std::stop_token st) { worker_loop(st, w); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    for (auto& t : threads_) t.request_stop();
    {
      std::lock_guard lock(mutex_);
      ++epoch_;
    }
    wake_.notify_all();
    threads_.clear();  // join before the synchronization members go away
  }

  [[nodiscard]] std::size_t size() const noexcept { return threads_.size(); }

  // Runs task(begin, end) over [0, n) split into static chunks and blocks until
  // every chunk has finished. Rethrows the first exception raised by a chunk.
  void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& task) {
    if (n == 0) return;
    std::lock_guard serial(dispatch_mutex_);
    const std::size_t chunk = choose_chunk(n, threads_.size());
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::latch done(static_cast<std::ptrdiff_t>(chunks));
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::lock_guard lock(mutex_);
      job_ = [&](std::size_t w) {
        if (w >= chunks) return;
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        try {
          task(begin, end);
        } catch (...) {
          std::lock_guard el(error_mutex);
          if (!error) error = std::current_exception();
        }
        done.count_down();
      };
      ++epoch_;
    }
    wake_.notify_all();
    done.wait();
    {
      // Workers that had no chunk may still be inside job_; wait for them to
      // check in before job_'s captures go out of scope.
      std::unique_lock lock(mutex_);
      idle_.wait(lock, [&] { return finished_ == threads_.size(); });
      finished_ = 0;
      job_ = nullptr;
    }
    if (error) std::rethrow_exception(error);
  }

 private:
  void worker_loop(std::stop_token st, std::size_t w) {
    std::uint64_t seen = 0;
    while (true) {
      std::function<void(std::size_t)> job;
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return epoch_ != seen || st.stop_requested(); });
        if (st.stop_requested()) return;
        seen = epoch_;
        job = job_;
      }
      if (job) job(w);
      {
        std::lock_guard lock(mutex_);
        ++finished_;
      }
      idle_.notify_one();
    }
  }

  std::vector<std::jthread> threads_;
  std::mutex dispatch_mutex_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::function<void(std::size_t)> job_;
  std::uint64_t epoch_ = 0;
  std::size_t finished_ = 0;
};

}  // namespace detail

/// Execution strategy shared by every data-parallel stage. Callers supply pure
/// kernels; each output cell is written by exactly one invocation, so results
/// never depend on the worker count.
class Backend {
 public:
  static Backend sequential() { return Backend(BackendKind::Sequential, 1); }

  /// workers == 0 selects std::thread::hardware_concurrency().
  static Backend parallel(std::size_t workers = 0) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    return Backend(BackendKind::Parallel, workers);
  }

  static Backend from_config(const RunConfig& cfg) {
    return cfg.backend == BackendKind::Sequential ? sequential() : parallel(cfg.threads);
  }

  [[nodiscard]] BackendKind kind() const noexcept { return kind_; }
  [[nodiscard]] const BackendDescriptor& descriptor() const noexcept { return descriptor_; }
  [[nodiscard]] std::size_t workers() const noexcept { return descriptor_.workers; }

  /// body(begin, end) over contiguous chunks covering [0, n).
  template <typename Body>
  void for_chunks(std::size_t n, Body&& body) {
    if (n == 0) return;
    if (!pool_ || n == 1) {
      body(std::size_t{0}, n);
      return;
    }
    pool_->run(n, [&](std::size_t b, std::size_t e) { body(b, e); });
  }

  /// out[i] = kernel(i) for i in [0, out.size()).
  template <typename T, typename Kernel>
  void map_rows(std::span<T> out, Kernel&& kernel) {
    for_chunks(out.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) out[i] = kernel(i);
    });
  }

  /// Calls kernel(i) for i in [0, rows); the kernel owns row i's output.
  template <typename Kernel>
  void for_rows(std::size_t rows, Kernel&& kernel) {
    for_chunks(rows, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) kernel(i);
    });
  }

  /// out(i, j) = kernel(i, j) over the full extent of out.
  template <typename T, typename Kernel>
  void map_elements(Matrix<T>& out, Kernel&& kernel) {
    const std::size_t cols = out.cols();
    if (cols == 0) return;
    auto cells = out.flat();
    for_chunks(cells.size(), [&](std::size_t b, std::size_t e) {
      std::size_t i = b / cols;
      std::size_t j = b % cols;
      for (std::size_t idx = b; idx < e; ++idx) {
        cells[idx] = kernel(i, j);
        if (++j == cols) {
          j = 0;
          ++i;
        }
      }
    });
  }

 private:
  Backend(BackendKind kind, std::size_t workers) : kind_(kind) {
    descriptor_.name = kind == BackendKind::Sequential ? "sequential" : "parallel";
    descriptor_.workers = workers;
    if (kind == BackendKind::Parallel && workers > 1)
      pool_ = std::make_unique<detail::WorkerPool>(workers);
  }

  BackendKind kind_;
  BackendDescriptor descriptor_;
  std::unique_ptr<detail::WorkerPool> pool_;
};

}  // namespace gsgp
