#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace carleson {

struct Execution {
    int threads = 1;
};

// Runs body(i) for i in [0, n). Results must be written to slot i by the caller,
// which keeps every reduction order independent of the thread count. The
// exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Execution exec, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, exec.threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    const std::size_t used = std::min(workers, n);
    for (std::size_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += used) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace carleson
