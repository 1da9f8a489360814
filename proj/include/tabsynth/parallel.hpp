#pragma once

#include <cstddef>
#include <functional>

namespace tabsynth {

// 0 means: TABSYNTH_THREADS if set, otherwise the available parallelism.
std::size_t resolve_threads(std::size_t requested);

// Runs task(i) for i in [0, num_tasks) on up to `threads` workers. Tasks are
// handed out dynamically; the first exception thrown is rethrown.
void parallel_for(std::size_t num_tasks, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace tabsynth
