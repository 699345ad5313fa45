#pragma once

// Deterministic parallel map: each index writes its own slot, so results do
// not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace polyflow {

inline unsigned& default_threads_slot()
{
    static unsigned n = 0;
    return n;
}

/// 0 restores the default (POLYFLOW_THREADS, else hardware concurrency).
inline void set_default_threads(unsigned n) { default_threads_slot() = n; }

inline unsigned default_threads()
{
    if (default_threads_slot() > 0) return default_threads_slot();
    if (const char* env = std::getenv("POLYFLOW_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class F>
void parallel_for(std::size_t n, F&& f, unsigned threads = 0)
{
    if (threads == 0) threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f, unsigned threads = 0)
{
    std::vector<R> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = f(i); }, threads);
    return out;
}

}  // namespace polyflow
