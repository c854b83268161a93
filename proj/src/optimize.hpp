#pragma once

// One-dimensional search helpers: golden-section refinement and a grid scan
// that refines the best few local maxima.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace selfnorm::detail {

struct Extremum {
  double x;
  double value;
};

/// Maximizes f on [lo, hi] by golden section; -inf values are allowed.
inline Extremum golden_max(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-11,
                           int max_iter = 200) {
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iter && hi - lo > rel_tol * std::max(1.0, std::abs(x1)); ++i) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

/// Evaluates f on the sorted grid, then refines up to `starts` grid-local
/// maxima with golden section on the neighbouring cells. Results are sorted
/// best first and include the unrefined grid values when those are better.
inline std::vector<Extremum> multistart_max(const std::function<double(double)>& f, const std::vector<double>& grid,
                                            const std::vector<double>& values, int starts = 5) {
  std::vector<std::size_t> peaks;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > -INFINITY)) continue;
    const bool left_ok = i == 0 || values[i] >= values[i - 1];
    const bool right_ok = i + 1 == n || values[i] >= values[i + 1];
    if (left_ok && right_ok) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (peaks.size() > static_cast<std::size_t>(starts)) peaks.resize(starts);

  std::vector<Extremum> out;
  for (std::size_t i : peaks) {
    const double lo = grid[i == 0 ? 0 : i - 1];
    const double hi = grid[i + 1 == n ? i : i + 1];
    Extremum e = lo < hi ? golden_max(f, lo, hi) : Extremum{grid[i], values[i]};
    if (!(e.value >= values[i])) e = {grid[i], values[i]};
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) { return a.value > b.value; });
  return out;
}

}  // namespace selfnorm::detail
