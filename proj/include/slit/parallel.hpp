#pragma once

#include <cstddef>
#include <functional>

namespace slit {

/// Worker count: hardware concurrency, capped by SLIT_HARMONIC_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over worker_count() threads. Iterations must
/// be independent; results are written by index so output order never
/// depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace slit
