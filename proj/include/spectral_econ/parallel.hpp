#pragma once

#include <cstddef>
#include <functional>

namespace spectral_econ {

/// Thread count from SPECTRAL_ECON_THREADS, or 1 when unset or malformed.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers with a static
/// contiguous partition. Results must be written by index for determinism.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace spectral_econ
