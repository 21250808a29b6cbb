#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace hsnl {

// Worker count: explicit override, else HSNL_THREADS, else the OpenMP default.
void set_threads(int n);
int threads();
// Apply HSNL_THREADS from the environment if set (called by the CLI before parsing flags).
void apply_thread_env();

// Run body(i) for i in [0, n) on the OpenMP team. Every index writes its own output, so
// results do not depend on the thread count. The exception thrown by the lowest index
// (if any) is rethrown after the loop.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body);

}  // namespace hsnl
