#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace ds {

/// Fixed-size worker pool for fanning out independent per-sample jobs.
/// Results must be written to caller-owned slots indexed by job id and
/// reduced sequentially afterwards, which keeps every run bit-deterministic
/// regardless of scheduling.
class ThreadPool {
public:
  explicit ThreadPool(unsigned threads) {
    if (threads == 0) threads = 1;
    for (unsigned i = 0; i < threads; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(workers_.size()); }

  /// Runs fn(i) for i in [0, n) and blocks until all complete. The first
  /// exception thrown by any job is rethrown after the batch finishes.
  void run_indexed(int n, std::function<void(int)> fn) {
    if (n <= 0) return;
    if (workers_.size() == 1 || n == 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    struct Batch {
      std::function<void(int)> fn;
      int n;
      std::atomic<int> next{0};
      std::atomic<int> done{0};
      std::exception_ptr err;
      std::mutex mu;
      std::condition_variable cv;
    };
    auto batch = std::make_shared<Batch>();
    batch->fn = std::move(fn);
    batch->n = n;
    auto drain = [batch] {
      for (;;) {
        int i = batch->next.fetch_add(1);
        if (i >= batch->n) break;
        try {
          batch->fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(batch->mu);
          if (!batch->err) batch->err = std::current_exception();
        }
        if (batch->done.fetch_add(1) + 1 == batch->n) {
          std::lock_guard<std::mutex> lk(batch->mu);
          batch->cv.notify_all();
        }
      }
    };
    {
      std::lock_guard<std::mutex> lk(mu_);
      unsigned helpers = std::min<unsigned>(static_cast<unsigned>(workers_.size()), static_cast<unsigned>(n) - 1);
      for (unsigned t = 0; t < helpers; ++t) tasks_.push(drain);
    }
    cv_.notify_all();
    drain(); // caller participates
    {
      std::unique_lock<std::mutex> lk(batch->mu);
      batch->cv.wait(lk, [&] { return batch->done.load() >= batch->n; });
    }
    if (batch->err) std::rethrow_exception(batch->err);
  }

  /// Process-wide pool sized from DSYNTH_THREADS or hardware concurrency.
  static ThreadPool& global();

private:
  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [this] { return stop_ || !tasks_.empty(); });
        if (stop_ && tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop();
      }
      task();
    }
  }

  std::vector<std::thread> workers_;
  std::queue<std::function<void()>> tasks_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
};

} // namespace ds
