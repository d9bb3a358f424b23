#pragma once

#include <cstddef>
#include <functional>

namespace fbmb::detail {

/// Worker count: min(FBMB_THREADS if set, hardware concurrency), at least 1.
std::size_t worker_count();

/// Runs fn(i) for i in [0, count) on the worker pool. fn must only write to
/// i-dependent state; iteration order is unspecified but the partition is
/// deterministic, so results cannot depend on the number of workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace fbmb::detail
