#pragma once

#include <functional>

namespace mlfe {

/// Thread count from the MLFE_THREADS environment variable, falling back to
/// std::thread::hardware_concurrency(), never less than 1.
[[nodiscard]] int default_threads();

/// Runs body(i) for i in [begin, end) on up to `threads` workers.
/// Indices are split into contiguous chunks; body must only write state owned
/// by index i, so results do not depend on the thread count.
void parallel_for(int begin, int end, int threads, const std::function<void(int)>& body);

}  // namespace mlfe
