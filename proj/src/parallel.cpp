#include "glyphspot/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace glyphspot {

int thread_budget() {
    int budget = 0;
    if (const char* env = std::getenv("GLYPHSPOT_THREADS")) {
        budget = std::atoi(env);
    }
    if (budget <= 0) budget = static_cast<int>(std::thread::hardware_concurrency());
    if (budget <= 0) budget = 1;
    return budget;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace glyphspot
