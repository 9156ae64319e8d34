#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace crlab {

/// Raised when inputs violate a documented precondition (bad config,
/// malformed file, out-of-range parameter).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (divergence, null density,
/// bracket expansion failure).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic reductions.
//
// All quadrature sums and inner products reduce with pairwise (cascade)
// summation in a fixed order, so reports are bit-stable regardless of the
// worker-thread count.
// ---------------------------------------------------------------------------

namespace detail {

inline double pairwise_sum_range(const double* a, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(a, half) + pairwise_sum_range(a + half, n - half);
}

inline double pairwise_dot_range(const double* a, const double* b, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_dot_range(a, b, half) + pairwise_dot_range(a + half, b + half, n - half);
}

} // namespace detail

inline double pairwise_sum(std::span<const double> values) {
    return detail::pairwise_sum_range(values.data(), values.size());
}

inline double pairwise_dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("pairwise_dot: size mismatch");
    return detail::pairwise_dot_range(a.data(), b.data(), a.size());
}

// ---------------------------------------------------------------------------
// Deterministic per-index pseudo-random values (splitmix64).
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Uniform in [0,1), a pure function of (seed, index).
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t z = splitmix64(seed ^ splitmix64(index + 1));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Worker pool.
//
// Used only for embarrassingly parallel per-node loops (disjoint writes).
// Reductions never run in the pool, so numerical output does not depend on
// the thread count. CRLAB_THREADS caps the number of workers.
// ---------------------------------------------------------------------------

class WorkerPool {
public:
    static WorkerPool& instance() {
        static WorkerPool pool(configured_threads());
        return pool;
    }

    int threads() const { return workers_ + 1; }

    /// Runs fn(begin, end) over [0, n) split into contiguous chunks.
    void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
        if (workers_ == 0 || n < 4096) {
            fn(0, n);
            return;
        }
        std::unique_lock<std::mutex> lk(mutex_);
        job_ = &fn;
        total_ = n;
        next_chunk_.store(0, std::memory_order_relaxed);
        pending_.store(workers_, std::memory_order_relaxed);
        ++generation_;
        lk.unlock();
        wake_.notify_all();

        work(fn, n); // the calling thread participates

        std::unique_lock<std::mutex> lk2(mutex_);
        done_.wait(lk2, [&] { return pending_.load(std::memory_order_acquire) == 0; });
        job_ = nullptr;
    }

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lk(mutex_);
            stop_ = true;
            ++generation_;
        }
        wake_.notify_all();
        for (auto& t : threads_) t.join();
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

private:
    explicit WorkerPool(int n_threads) : workers_(n_threads > 1 ? n_threads - 1 : 0) {
        threads_.reserve(static_cast<std::size_t>(workers_));
        for (int i = 0; i < workers_; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    static int configured_threads() {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
        if (n > 8) n = 8;
        if (const char* env = std::getenv("CRLAB_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) n = static_cast<int>(v > 64 ? 64 : v);
        }
        return n;
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t, std::size_t)>* job = nullptr;
            std::size_t total = 0;
            {
                std::unique_lock<std::mutex> lk(mutex_);
                wake_.wait(lk, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                job = job_;
                total = total_;
            }
            if (job) work(*job, total);
            if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                std::lock_guard<std::mutex> lk(mutex_);
                done_.notify_all();
            }
        }
    }

    void work(const std::function<void(std::size_t, std::size_t)>& fn, std::size_t n) {
        const std::size_t chunk = (n + 4 * static_cast<std::size_t>(workers_ + 1) - 1) /
                                  (4 * static_cast<std::size_t>(workers_ + 1));
        for (;;) {
            const std::size_t begin = next_chunk_.fetch_add(chunk, std::memory_order_relaxed);
            if (begin >= n) break;
            fn(begin, std::min(begin + chunk, n));
        }
    }

    const int workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
    std::size_t total_ = 0;
    std::uint64_t generation_ = 0;
    std::atomic<std::size_t> next_chunk_{0};
    std::atomic<int> pending_{0};
    bool stop_ = false;
};

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    WorkerPool::instance().run(n, fn);
}

} // namespace crlab
