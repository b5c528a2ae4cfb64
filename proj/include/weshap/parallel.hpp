#pragma once

#include <cstddef>
#include <functional>

namespace weshap {

/// Worker count: WESHAP_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads using contiguous blocks.
/// Callers write results into per-index slots and reduce afterwards in index order, which
/// keeps outputs independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace weshap
