#pragma once

#include <Eigen/Core>
#include <span>
#include <string>

#include "selfnorm/distributions.hpp"
#include "selfnorm/legendre.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm {

/// {x : x . normal >= offset}.
struct HalfPlane {
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
  double offset = 0.0;

  bool contains(const Eigen::Vector2d& x) const { return x.dot(normal) >= offset; }
};

/// x2 >= 0 and x1 >= z u_+^{-1}(x2). The origin always belongs.
bool in_target_set(const Eigen::Vector2d& x, double z, const Normalizer& norm);

/// Supporting half-plane of the target set at boundary abscissa y, power law u = |x|^p.
HalfPlane normal_and_offset(double y, double z, double p);
/// Same for a general normalizer; the slope of u comes from Normalizer::derivative.
HalfPlane normal_and_offset(double y, double z, const Normalizer& norm);

Eigen::Vector2d unit_normal(double y, double z, double p);

/// Parameterization y >= 0 -> (y, u(y / z)) of the lower boundary of the target set.
class BoundaryChart {
 public:
  BoundaryChart(double z, Normalizer norm);

  double z() const { return z_; }
  const Normalizer& normalizer() const { return norm_; }

  Eigen::Vector2d point(double y) const;
  HalfPlane half_plane(double y) const;
  Eigen::Vector2d unit_normal(double y) const;

 private:
  double z_;
  Normalizer norm_;
};

/// Law of xi = nu1 X - u(X), the jump projected on the normal at y.
UnivariateLaw projected_jump_law(const ScalarDistribution& dist, double y, double z, double p);
UnivariateLaw projected_jump_law(const ScalarDistribution& dist, double y, double z, const Normalizer& norm);

/// "y,x1,x2" rows along the boundary.
std::string boundary_polyline_csv(const BoundaryChart& chart, std::span<const double> ys);

}  // namespace selfnorm
