#pragma once

#include <cstddef>
#include <functional>

namespace chain {

void set_worker_threads(int n);
int worker_threads();

// Runs body(i) for i in [0, n) on the worker threads; blocks until done.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace chain
