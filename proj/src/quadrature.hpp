#pragma once

// Log-space quadrature over one real variable: locate the peak of a log
// integrand, truncate where it has fallen by kTailDrop nats, and integrate the
// rescaled integrand with adaptive Gauss-Kronrod on pieces split at the
// supplied breakpoints.

#include <functional>
#include <vector>

namespace selfnorm::detail {

inline constexpr double kTailDrop = 80.0;

struct Chart {
  double lo;                   // may be -inf
  double hi;                   // may be +inf
  bool hi_is_cap = false;      // hi truncates an unbounded domain (overflow guard)
  double center;               // typical location
  double scale;                // typical spread
  std::vector<double> breaks;  // non-smooth points of the integrand
  std::vector<double> hints;   // extra candidate peak locations
};

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double peak = 0.0;
  double log_peak = 0.0;
  double width = 0.0;  // 1 / sqrt(-g'') at the peak, capped by the chart scale
  bool divergent = false;
};

/// Finds [lo, hi] outside which g < log_peak - kTailDrop. Flags divergence
/// when g does not decay toward an infinite end of the chart.
Window find_window(const std::function<double(double)>& log_integrand, const Chart& chart);

/// Integral of f over [a, b] split at the breaks inside it. Throws
/// NumericFailure when the estimated error exceeds abs_tol + 1e3 rel_tol
/// times the integral of |f|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breaks, double rel_tol = 1e-13, double abs_tol = 1e-12);

}  // namespace selfnorm::detail
