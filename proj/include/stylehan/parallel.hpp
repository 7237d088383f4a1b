#pragma once

namespace stylehan::parallel {

// Worker count for data-parallel regions: the OpenMP default, capped by
// STYLEHAN_THREADS when set to a positive integer.
int worker_count();

// True when called from inside an active parallel region.
bool in_parallel();

}  // namespace stylehan::parallel
