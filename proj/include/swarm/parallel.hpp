#ifndef SWARM_PARALLEL_HPP
#define SWARM_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace swarm {

/// Runs fn(i) for i in [0, count) across OpenMP threads and collects results in
/// index order. Exceptions from workers are rethrown on the calling thread.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  std::exception_ptr error;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(swarm_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Reference for parallel_map.
template <class Fn>
auto serial_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
  return out;
}

/// Caps the worker count used by every parallel kernel (0 keeps the runtime default).
inline void set_thread_limit(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace swarm

#endif  // SWARM_PARALLEL_HPP
