#pragma once

// Data-parallel kernels with a serial twin. Work is cut into fixed chunks
// whose boundaries do not depend on the thread count, each chunk is computed
// independently, and partial results are combined in chunk order. The two
// execution modes are therefore bit-identical.

#include <cmath>
#include <cstddef>
#include <exception>
#include <vector>

namespace bilateral {

enum class Exec { Serial, Parallel };

namespace detail {

inline void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// out[i] = f(i) for i in [0, n).
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, Exec exec, F&& f) {
  std::vector<T> out(n);
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = f(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  detail::rethrow_first(errors);
  return out;
}

// Splits [0, n) into chunks of `chunk` items, evaluates
// body(chunk_index, begin, end) -> Acc on each, and folds the partials left
// to right with combine(Acc&, const Acc&), starting from `init`.
template <class Acc, class Body, class Combine>
Acc chunked_reduce(std::size_t n, std::size_t chunk, Exec exec, Acc init, Body&& body,
                   Combine&& combine) {
  if (chunk == 0) chunk = 1;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  auto partials = parallel_map<Acc>(chunks, exec, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    return body(c, begin, end);
  });
  for (const Acc& p : partials) combine(init, p);
  return init;
}

struct ArgBest {
  std::size_t index = 0;
  double value = 0.0;
};

// Index of the largest value; among values within rel_tie * max(1, |best|)
// of the best, the lowest index wins.
inline ArgBest argmax_lowest(const std::vector<double>& values, double rel_tie = 1e-12) {
  ArgBest best{0, values.empty() ? 0.0 : values[0]};
  double top = best.value;
  for (double v : values) top = std::fmax(top, v);
  const double tol = rel_tie * std::fmax(1.0, std::fabs(top));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= top - tol) return {i, values[i]};
  }
  return best;
}

inline ArgBest argmin_lowest(const std::vector<double>& values, double rel_tie = 1e-12) {
  ArgBest best{0, values.empty() ? 0.0 : values[0]};
  double low = best.value;
  for (double v : values) low = std::fmin(low, v);
  const double tol = rel_tie * std::fmax(1.0, std::fabs(low));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= low + tol) return {i, values[i]};
  }
  return best;
}

}  // namespace bilateral
