#pragma once

#include <cstddef>
#include <functional>

namespace weaklab {

// Process-wide worker count used by parallel_for. Zero means "use
// std::thread::hardware_concurrency()".
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls fn(i) for i in [0, n). Indices are split into contiguous blocks, one
// per worker. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace weaklab
