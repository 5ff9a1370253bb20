#pragma once

#include <exception>

namespace esense::detail {

// Runs body(i) for i in [0, n) on the OpenMP team. The first exception
// thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(int n, Body&& body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(esense_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace esense::detail
