#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rangeshift {

/// Fixed-size pool executing index ranges with a static partition. Each index
/// is visited by exactly one worker and the partition depends only on the
/// range length and worker count, so callers that write disjoint slots get
/// bitwise-identical results for any thread count.
class WorkerPool {
public:
  explicit WorkerPool(std::size_t threads) : threads_(std::max<std::size_t>(threads, 1)) {
    for (std::size_t w = 1; w < threads_; ++w) workers_.emplace_back([this, w] { loop(w); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    wake_.notify_all();
    workers_.clear();  // join before the synchronisation members go away
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_; }

  /// Calls body(lo, hi) on contiguous chunks of [begin, end).
  void for_range(std::size_t begin, std::size_t end,
                 const std::function<void(std::size_t, std::size_t)>& body) {
    if (end <= begin) return;
    if (threads_ == 1) {
      body(begin, end);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      body_ = &body;
      begin_ = begin;
      end_ = end;
      pending_ = threads_ - 1;
      ++generation_;
    }
    wake_.notify_all();
    run_chunk(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
  }

private:
  void run_chunk(std::size_t w) {
    const std::size_t n = end_ - begin_;
    const std::size_t lo = begin_ + n * w / threads_;
    const std::size_t hi = begin_ + n * (w + 1) / threads_;
    if (lo < hi) (*body_)(lo, hi);
  }

  void loop(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_chunk(w);
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  std::size_t threads_;
  std::vector<std::jthread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t begin_ = 0, end_ = 0, pending_ = 0, generation_ = 0;
  bool stop_ = false;
};

}  // namespace rangeshift
