#pragma once

#include <cstddef>
#include <functional>

namespace patchslide {

/// Number of worker threads for grid sweeps: PATCHSLIDE_THREADS if set,
/// otherwise the hardware concurrency.
int sweep_thread_count();

/// Run fn(i) for i in [0, n) across the sweep threads. Each index writes to
/// its own output slot, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace patchslide
