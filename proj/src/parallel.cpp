#include "chain/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chain {

namespace {
std::atomic<int> g_threads{1};
}

void set_worker_threads(int n) { g_threads = n < 1 ? 1 : n; }
int worker_threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body) {
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(g_threads.load()), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto &th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace chain
