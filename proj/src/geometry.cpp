#include "selfnorm/geometry.hpp"

#include <charconv>
#include <cmath>

#include "selfnorm/errors.hpp"

namespace selfnorm {

namespace {

void check_args(double y, double z) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("boundary abscissa y must be finite and >= 0");
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("z must be finite and positive");
}

std::string fmt(double v) {
  char buf[64];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

}  // namespace

bool in_target_set(const Eigen::Vector2d& x, double z, const Normalizer& norm) {
  if (!(x(1) >= 0.0)) return false;
  return x(0) >= z * norm.inverse_positive(x(1));
}

HalfPlane normal_and_offset(double y, double z, double p) {
  check_args(y, z);
  if (!(p > 1.0)) throw DomainError("power-law exponent must exceed 1");
  const double zp = std::pow(z, -p);
  HalfPlane hp;
  hp.normal = {p * std::pow(y, p - 1.0) * zp, -1.0};
  hp.offset = (p - 1.0) * std::pow(y, p) * zp;
  return hp;
}

HalfPlane normal_and_offset(double y, double z, const Normalizer& norm) {
  if (norm.is_power_law()) return normal_and_offset(y, z, norm.p());
  check_args(y, z);
  const double slope = norm.derivative(y / z) / z;
  HalfPlane hp;
  hp.normal = {slope, -1.0};
  hp.offset = y * slope - norm(y / z);
  return hp;
}

Eigen::Vector2d unit_normal(double y, double z, double p) { return normal_and_offset(y, z, p).normal.normalized(); }

BoundaryChart::BoundaryChart(double z, Normalizer norm) : z_(z), norm_(std::move(norm)) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("z must be finite and positive");
}

Eigen::Vector2d BoundaryChart::point(double y) const {
  if (norm_.is_power_law()) return {y, std::pow(y / z_, norm_.p())};
  return {y, norm_(y / z_)};
}

HalfPlane BoundaryChart::half_plane(double y) const { return normal_and_offset(y, z_, norm_); }

Eigen::Vector2d BoundaryChart::unit_normal(double y) const { return half_plane(y).normal.normalized(); }

UnivariateLaw projected_jump_law(const ScalarDistribution& dist, double y, double z, double p) {
  return projected_jump_law(dist, y, z, Normalizer::power_law(p));
}

UnivariateLaw projected_jump_law(const ScalarDistribution& dist, double y, double z, const Normalizer& norm) {
  const double c = normal_and_offset(y, z, norm).normal(0);
  UnivariateLaw law;
  law.log_mgf = [dist, norm, c](double lambda) { return cumulant(dist, norm, {lambda * c, -lambda}); };
  const ExtendedReal eu = expected_normalizer(dist, norm);
  const ExtendedReal ex = dist.mean();
  if (eu.is_plus_infinity()) {
    // u grows faster than linearly, so -u(X) dominates c X.
    law.mean = ExtendedReal::minus_infinity();
  } else if (!ex.is_finite()) {
    law.mean = c == 0.0 ? ExtendedReal::finite(-eu.value()) : (c > 0 ? ex : -ex);
  } else {
    law.mean = ExtendedReal::finite(c * ex.value() - eu.value());
  }
  return law;
}

std::string boundary_polyline_csv(const BoundaryChart& chart, std::span<const double> ys) {
  std::string out = "y,x1,x2\n";
  for (double y : ys) {
    const Eigen::Vector2d pt = chart.point(y);
    out += fmt(y) + "," + fmt(pt(0)) + "," + fmt(pt(1)) + "\n";
  }
  return out;
}

}  // namespace selfnorm
