#pragma once

#include <cstddef>
#include <functional>

namespace gravidec {

/// Worker count from GRAVIDEC_THREADS; defaults to the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Indices are
/// assigned round-robin so results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gravidec
