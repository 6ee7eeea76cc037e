#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "hardy/execution.hpp"

namespace hardy::detail {

/// Runs f(i) for i in [0, n). Work items must write only their own slots.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
  }
}

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of x[0], x[stride], ..., in index order.
inline SampleStats summarize(const double* x, std::size_t n, std::size_t stride = 1) {
  SampleStats s;
  if (n == 0) return s;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i * stride];
  s.mean = sum / static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dv = x[i * stride] - s.mean;
    ss += dv * dv;
  }
  s.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return s;
}

}  // namespace hardy::detail
