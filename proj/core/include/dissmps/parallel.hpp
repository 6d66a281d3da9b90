#pragma once

#include <cstddef>
#include <functional>

namespace dissmps {

// Worker cap from DISS_MPS_THREADS, else hardware concurrency (at least 1).
int worker_count();

// Runs f(i) for i in [0, count) on up to `workers` threads. Exceptions from
// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f, int workers = 0);

}  // namespace dissmps
