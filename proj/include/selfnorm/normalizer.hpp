#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace selfnorm {

/// The convex normalizing function u of the self-normalized sum
/// W_n = S_n / (n u_+^{-1}(U_n / n)), U_n = sum u(X_j).
///
/// Either the power law u(x) = |x|^p (p > 1) or a custom convex function with
/// u(0) = 0 that is strictly increasing in |x| on both half-lines.
class Normalizer {
 public:
  /// u(x) = |x|^p.
  static Normalizer power_law(double p);

  /// Piecewise-linear interpolation of the given (x, u) knots, extended
  /// linearly beyond the outer knots. Knots must contain (0, 0), have
  /// non-decreasing slopes, and be strictly monotone on each side of 0.
  static Normalizer tabulated(std::vector<std::pair<double, double>> knots);

  /// Arbitrary convex u; the caller vouches for the shape requirements.
  /// `breakpoints` lists points of non-smoothness for quadrature.
  static Normalizer custom(std::function<double(double)> u, std::vector<double> breakpoints = {});

  double operator()(double x) const;

  /// Inverse of u restricted to [0, inf).
  double inverse_positive(double v) const;

  double derivative(double x) const;
  double second_derivative(double x) const;

  bool is_power_law() const { return !custom_; }
  /// Exponent of the power law; throws for custom normalizers.
  double p() const;

  /// Non-smooth points of u (always includes 0).
  std::vector<double> breakpoints() const;

  /// Knots when built by tabulated(), otherwise empty.
  const std::vector<std::pair<double, double>>& knots() const;

 private:
  struct Custom {
    std::function<double(double)> u;
    std::vector<double> breakpoints;
    std::vector<std::pair<double, double>> knots;
  };

  Normalizer() = default;

  double p_ = 2.0;
  std::shared_ptr<const Custom> custom_;
};

}  // namespace selfnorm
