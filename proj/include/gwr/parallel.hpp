#pragma once

namespace gwr {

// Number of OpenMP workers used by the parallel kernels (1 without OpenMP).
int worker_count();
// n <= 0 leaves the OpenMP default in place.
void set_worker_count(int n);

}  // namespace gwr
