#pragma once

#include <cstddef>
#include <functional>

namespace axrx {

/// Worker budget: AXRX_WORKERS when set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Runs task(i) for i in [0, count) on up to worker_count() threads.
/// Tasks must write only to their own output slots; the first exception
/// thrown by any task is rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace axrx
