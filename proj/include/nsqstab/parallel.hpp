#pragma once

#include <cstddef>
#include <functional>

namespace nsqstab {

/// Worker count from NSQSTAB_THREADS (default 1).
unsigned worker_count();

/// Runs fn(i) for i in [0, count) on worker_count() threads. fn must only write to slot i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace nsqstab
