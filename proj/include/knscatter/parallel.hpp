#pragma once

#include <cstddef>
#include <functional>

namespace kn {

// Worker count: KN_SCATTER_THREADS if set (>= 1), otherwise the hardware count.
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker and
// results are written by index, so output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace kn
