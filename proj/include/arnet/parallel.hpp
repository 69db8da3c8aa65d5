#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace arnet {

inline int hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Resolves the worker count: ARNET_THREADS env wins, then the explicit
// request, then all cores.
inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("ARNET_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    return hardware_threads();
}

// Runs fn(i) for i in [0, count). Work is claimed through an atomic counter;
// callers write results to index-addressed slots so output order is fixed
// regardless of scheduling. The first exception is rethrown on the caller.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace arnet
