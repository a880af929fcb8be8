#pragma once

#include <cstddef>
#include <functional>

namespace mimic {

/// Worker threads used by parallel_for. Defaults to the MIMIC_THREADS
/// environment variable, else the hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for every i in [0, n). Each index is visited exactly once;
/// callers write results into per-index slots, so outputs never depend on
/// scheduling. Nested calls run serially on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mimic
