#pragma once

#include <omp.h>

namespace modamp::detail {

/// Thread count for a task-level loop; 0 defers to the OpenMP runtime.
inline int resolve_workers(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

}  // namespace modamp::detail
