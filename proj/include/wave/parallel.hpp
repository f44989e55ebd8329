#pragma once

#include "wave/types.hpp"

#include <functional>

namespace wave {

/// Worker count: WAVE_EPI_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n). Each index must write only its own outputs so the
/// result does not depend on scheduling. The first exception by index is rethrown.
void parallel_for(Index n, std::function<void(Index)> const &fn);

} // namespace wave
