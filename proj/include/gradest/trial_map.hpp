#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gradest {

// Serial reference: runs fn(t) for t = 0..trials-1 in order. Kept as the
// ground truth the parallel runner is tested and benchmarked against.
template <class Fn>
void map_trials_serial(std::int64_t trials, Fn&& fn) {
    for (std::int64_t t = 0; t < trials; ++t) fn(t);
}

// OpenMP runner. fn(t) must write only to trial-t slots and draw randomness
// only through counter-based streams keyed by t; under that contract the
// results are bitwise identical to the serial reference for any thread count.
// threads <= 0 picks the OpenMP default.
template <class Fn>
void map_trials_parallel(std::int64_t trials, int threads, Fn&& fn) {
#ifdef _OPENMP
    if (threads > 0) {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t t = 0; t < trials; ++t) fn(t);
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t t = 0; t < trials; ++t) fn(t);
    }
#else
    (void)threads;
    map_trials_serial(trials, fn);
#endif
}

// Parallel runner that ferries the first exception out of the OpenMP region
// (exceptions must not unwind across a parallel loop).
template <class Fn>
void map_trials_checked(std::int64_t trials, int threads, Fn&& fn) {
    std::atomic<bool> failed{false};
    std::string message;
    std::mutex mu;
    map_trials_parallel(trials, threads, [&](std::int64_t t) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            fn(t);
        } catch (const std::exception& e) {
            const std::lock_guard<std::mutex> lock(mu);
            failed.store(true, std::memory_order_relaxed);
            if (message.empty()) message = e.what();
        }
    });
    if (failed.load()) throw std::runtime_error("trial failed: " + message);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace gradest
