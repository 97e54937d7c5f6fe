#ifndef DFSLAB_PARALLEL_HPP
#define DFSLAB_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace dfslab {

/// Evaluates f(i) for i in [0, n) in index order on the calling thread.
/// Reference for `parallel_map`; tests compare the two bit for bit.
template <class F>
auto serial_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
  return out;
}

/// OpenMP fan-out of independent pure tasks.  Results land at their own
/// index, so the output is identical to `serial_map` regardless of thread
/// count or scheduling.  The first exception thrown by any task is
/// rethrown on the calling thread after the loop.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(f(static_cast<std::size_t>(i)));
    } catch (...) {
#pragma omp critical(dfslab_parallel_map_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline int max_threads() { return omp_get_max_threads(); }

}  // namespace dfslab

#endif  // DFSLAB_PARALLEL_HPP
