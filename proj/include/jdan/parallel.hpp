#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace jdan {

//! Worker cap from JDAN_THREADS, else hardware concurrency (at least 1).
std::size_t worker_count();

//! Runs body(i) for i in [0, n) over contiguous chunks, one per worker.
//! The first exception thrown by any worker is rethrown on the caller.
//! Callers that need reproducible results write per-index slots and reduce
//! them in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace jdan
