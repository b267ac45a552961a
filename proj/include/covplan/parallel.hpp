#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace covplan {

// Worker count: COVPLAN_WORKERS if set, otherwise hardware concurrency.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("COVPLAN_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Fixed-size pool running blocking, statically partitioned parallel loops.
// Each index is processed exactly once; callers write results into per-index
// slots so outcomes never depend on scheduling.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned workers = default_worker_count()) : size_(std::max(1u, workers)) {
    for (unsigned i = 1; i < size_; ++i) threads_.emplace_back([this, i] { worker(i); });
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return size_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    // Nested loops (called from inside a running job) execute inline.
    if (size_ == 1 || n == 1 || inside_job()) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::unique_lock call_lock(call_mu_);
    {
      std::lock_guard lock(mu_);
      job_ = &fn;
      job_n_ = n;
      pending_ = size_ - 1;
      errors_.assign(size_, nullptr);
      ++epoch_;
    }
    cv_.notify_all();
    run_chunk(0, fn, n);
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    for (auto& e : errors_)
      if (e) std::rethrow_exception(e);
  }

 private:
  static bool& inside_job() {
    thread_local bool flag = false;
    return flag;
  }

  void run_chunk(unsigned part, const std::function<void(std::size_t)>& fn, std::size_t n) {
    const std::size_t begin = n * part / size_;
    const std::size_t end = n * (part + 1) / size_;
    inside_job() = true;
    try {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    } catch (...) {
      errors_[part] = std::current_exception();
    }
    inside_job() = false;
  }

  void worker(unsigned part) {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* job = nullptr;
      std::size_t n = 0;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
        job = job_;
        n = job_n_;
      }
      run_chunk(part, *job, n);
      {
        std::lock_guard lock(mu_);
        if (--pending_ == 0) done_cv_.notify_one();
      }
    }
  }

  unsigned size_;
  std::vector<std::thread> threads_;
  std::mutex call_mu_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  unsigned pending_ = 0;
  std::size_t epoch_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

// Process-wide pool shared by renderers and the planner.
inline ThreadPool& global_pool() {
  static ThreadPool pool;
  return pool;
}

}  // namespace covplan
