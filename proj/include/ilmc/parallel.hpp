#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace ilmc {

/// How replica loops are executed. `kSerial` is the reference path; both
/// produce bitwise identical results because every replica owns its RNG
/// stream and writes only its own output slot.
enum class Exec { kSerial, kParallel };

/// Runs body(i) for i in [0, n). Exceptions thrown by any replica are
/// rethrown (the one from the lowest index wins) after the loop finishes.
template <class Body>
void for_each_replica(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::kSerial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex mu;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

/// Number of worker threads the parallel path will use.
int worker_count();

}  // namespace ilmc
