#pragma once

#include <cstddef>
#include <functional>

namespace glyphspot {

// Worker count from GLYPHSPOT_THREADS (0 or unset = hardware concurrency),
// re-read on every call so tests can vary it per run.
int thread_budget();

// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so the
// result is identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace glyphspot
