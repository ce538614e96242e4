#pragma once

#include <cmath>

namespace wgf {

struct FiniteDiffResult {
  double value = 0.0;
  bool finite = true;
};

/// 4th-order central first difference.
template <typename F>
FiniteDiffResult finite_diff(F&& f, double x, double h) {
  const double v =
      (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  return {v, std::isfinite(v)};
}

/// Standard central second difference.
template <typename F>
FiniteDiffResult finite_diff_second(F&& f, double x, double h) {
  const double v = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
  return {v, std::isfinite(v)};
}

}  // namespace wgf
