#include "selfnorm/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selfnorm/errors.hpp"

namespace selfnorm {

Normalizer Normalizer::power_law(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("power-law normalizer needs p > 1");
  Normalizer n;
  n.p_ = p;
  return n;
}

Normalizer Normalizer::tabulated(std::vector<std::pair<double, double>> knots) {
  std::sort(knots.begin(), knots.end());
  if (knots.size() < 3) throw PreconditionError("tabulated normalizer needs at least 3 knots");
  auto zero = std::find_if(knots.begin(), knots.end(), [](const auto& k) { return k.first == 0.0; });
  if (zero == knots.end() || zero->second != 0.0)
    throw PreconditionError("tabulated normalizer must contain the knot (0, 0)");
  if (zero == knots.begin() || zero + 1 == knots.end())
    throw PreconditionError("tabulated normalizer needs knots on both sides of 0");
  double last_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double dx = knots[i].first - knots[i - 1].first;
    if (!(dx > 0.0)) throw PreconditionError("tabulated normalizer has duplicate knots");
    const double slope = (knots[i].second - knots[i - 1].second) / dx;
    if (slope < last_slope) throw PreconditionError("tabulated normalizer is not convex");
    const bool right = knots[i - 1].first >= 0.0;
    if (right ? !(slope > 0.0) : !(slope < 0.0))
      throw PreconditionError("tabulated normalizer must be strictly increasing in |x|");
    last_slope = slope;
  }

  auto table = knots;
  auto u = [table](double x) {
    auto hi = std::upper_bound(table.begin(), table.end(), x,
                               [](double v, const auto& k) { return v < k.first; });
    if (hi == table.begin()) hi = table.begin() + 1;
    if (hi == table.end()) hi = table.end() - 1;
    const auto lo = hi - 1;
    const double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  };
  std::vector<double> bps;
  for (const auto& k : knots) bps.push_back(k.first);

  Normalizer n;
  n.custom_ = std::make_shared<const Custom>(Custom{u, std::move(bps), std::move(knots)});
  return n;
}

Normalizer Normalizer::custom(std::function<double(double)> u, std::vector<double> breakpoints) {
  if (!u) throw PreconditionError("custom normalizer needs a callable");
  if (std::abs(u(0.0)) > 1e-14) throw PreconditionError("custom normalizer must satisfy u(0) = 0");
  breakpoints.push_back(0.0);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  Normalizer n;
  n.custom_ = std::make_shared<const Custom>(Custom{std::move(u), std::move(breakpoints), {}});
  return n;
}

double Normalizer::operator()(double x) const {
  if (custom_) return custom_->u(x);
  return std::pow(std::abs(x), p_);
}

double Normalizer::inverse_positive(double v) const {
  if (v < 0.0) throw PreconditionError("u_+^{-1} is defined on [0, inf)");
  if (v == 0.0) return 0.0;
  if (!custom_) return std::pow(v, 1.0 / p_);
  double lo = 0.0, hi = 1.0;
  while ((*this)(hi) < v) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericFailure("u_+^{-1}: no bracket", v);
  }
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    ((*this)(mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Normalizer::derivative(double x) const {
  if (!custom_) {
    const double ax = std::abs(x);
    return (x < 0.0 ? -1.0 : 1.0) * p_ * std::pow(ax, p_ - 1.0);
  }
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return ((*this)(x + h) - (*this)(x - h)) / (2.0 * h);
}

double Normalizer::second_derivative(double x) const {
  if (!custom_) return p_ * (p_ - 1.0) * std::pow(std::abs(x), p_ - 2.0);
  const double h = 1e-4 * std::max(1.0, std::abs(x));
  return ((*this)(x + h) - 2.0 * (*this)(x) + (*this)(x - h)) / (h * h);
}

double Normalizer::p() const {
  if (custom_) throw PreconditionError("custom normalizer has no exponent p");
  return p_;
}

std::vector<double> Normalizer::breakpoints() const {
  if (custom_) return custom_->breakpoints;
  return {0.0};
}

const std::vector<std::pair<double, double>>& Normalizer::knots() const {
  static const std::vector<std::pair<double, double>> none;
  return custom_ ? custom_->knots : none;
}

}  // namespace selfnorm
