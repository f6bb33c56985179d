#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace scorebin {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Caps the number of worker threads used by row-parallel kernels.
/// 0 means "use the hardware concurrency".
inline void set_max_threads(unsigned n) noexcept { detail::thread_cap().store(n); }

inline unsigned max_threads() noexcept {
  const unsigned cap = detail::thread_cap().load();
  if (cap != 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over contiguous row blocks of [0, rows).
/// Each row is processed by exactly one call, so per-row kernels give
/// results independent of the partitioning.
template <typename Body>
void parallel_rows(std::size_t rows, Body&& body) {
  constexpr std::size_t kMinRowsPerTask = 16;
  const std::size_t tasks =
      std::min<std::size_t>(max_threads(), std::max<std::size_t>(1, rows / kMinRowsPerTask));
  if (tasks <= 1) {
    body(std::size_t{0}, rows);
    return;
  }

  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(tasks);
  workers.reserve(tasks - 1);
  const std::size_t chunk = (rows + tasks - 1) / tasks;
  for (std::size_t t = 1; t < tasks; ++t) {
    const std::size_t begin = std::min(rows, t * chunk);
    const std::size_t end = std::min(rows, begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  try {
    body(std::size_t{0}, std::min(rows, chunk));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace scorebin
