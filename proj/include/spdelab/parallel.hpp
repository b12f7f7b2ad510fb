#pragma once

#include <algorithm>
#include <cmath>
#include <atomic>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace spdelab::par {

// Runs f(i) for i in [0, count). Work is pulled from an atomic counter, so
// the schedule varies but callers store results by index and reduce in index
// order, keeping every derived number schedule-independent.
inline void parallel_for(int count, int threads, const std::function<void(int)>& f) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    f(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
}

// Static contiguous split of [0, count) across threads; f(begin, end) runs
// once per thread so workers can build their own scratch state.
inline void parallel_partition(int count, int threads,
                               const std::function<void(int, int)>& f) {
    const int nt = std::max(1, std::min(threads, count));
    if (nt == 1) {
        f(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    pool.reserve(nt);
    const int base = count / nt, extra = count % nt;
    int begin = 0;
    for (int t = 0; t < nt; ++t) {
        const int len = base + (t < extra ? 1 : 0);
        const int end = begin + len;
        pool.emplace_back([&, begin, end] {
            try {
                f(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
}

// Compensated summation in the order given (Kahan-Babuska-Neumaier).
inline double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + c;
}

struct MeanVar {
    double mean;
    double variance;  // unbiased sample variance
};

// Two-pass mean/variance with compensated sums, deterministic in input order.
inline MeanVar mean_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    const double mean = kahan_sum(xs) / double(n);
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double d = (x - mean) * (x - mean) - c;
        const double t = s + d;
        c = (t - s) - d;
        s = t;
    }
    return {mean, n > 1 ? s / double(n - 1) : 0.0};
}

}  // namespace spdelab::par
