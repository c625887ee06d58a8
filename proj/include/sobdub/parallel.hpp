#pragma once

#include <cstddef>
#include <functional>

namespace sobdub {

/// Worker count: SOBDUB_THREADS when set to a positive integer (at most
/// 256), hardware concurrency otherwise.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Iterations must write to disjoint slots;
/// callers merge results in index order so output is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sobdub
