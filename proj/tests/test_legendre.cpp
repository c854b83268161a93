#include "doctest.h"

#include <cmath>
#include <random>

#include "selfnorm/errors.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/legendre.hpp"
#include "test_support.hpp"

using namespace selfnorm;
using selfnorm::testing::families;
using selfnorm::testing::random_tilt;

namespace {

// Golden-section maximizer of a concave function on [lo, hi].
template <class F>
double golden_max(F f, double lo, double hi, int steps = 200) {
  const double g = 0.6180339887498949;
  double a = lo, b = hi, x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < steps; ++i) {
    if (f1 >= f2) {
      b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = f(x2);
    }
  }
  return std::max(f1, f2);
}

// Lambda for (X, X^2), X ~ N(mu, s^2): the sup over lambda1 is explicit, the
// remaining one-dimensional concave problem is solved by golden section.
double gaussian_p2_rate(double mu, double s, double a1, double a2) {
  const double s2 = s * s;
  auto profile = [&](double l2) {
    const double k = 1.0 - 2.0 * l2 * s2;
    const double l1 = (a1 * k - mu) / s2;
    const double logmgf = -0.5 * std::log(k) + std::pow(l1 * s2 + mu, 2) / (2 * s2 * k) - mu * mu / (2 * s2);
    return a1 * l1 + a2 * l2 - logmgf;
  };
  return golden_max(profile, -1e4, 1.0 / (2 * s2) - 1e-12, 400);
}

double objective(const ScalarDistribution& d, const Normalizer& n, const Eigen::Vector2d& a, const Eigen::Vector2d& l) {
  const TiltVector t = TiltVector::from(l);
  if (!in_cumulant_interior(d, n, t)) return -INFINITY;
  const ExtendedReal k = cumulant(d, n, t);
  return k.is_finite() ? a.dot(l) - k.value() : -INFINITY;
}

// Points of A' obtained as tilted means of random interior tilts.
std::vector<Eigen::Vector2d> interior_alphas(const selfnorm::testing::Family& f, int count, std::mt19937_64& rng) {
  std::vector<Eigen::Vector2d> out;
  while (static_cast<int>(out.size()) < count) {
    const TiltVector t = random_tilt(f, rng);
    if (!in_cumulant_interior(f.dist, f.norm, t)) continue;
    out.push_back(cumulant_grad(f.dist, f.norm, t));
  }
  return out;
}

}  // namespace

TEST_CASE("rate vanishes at the mean") {
  const auto d = ScalarDistribution::gaussian(-0.5, 1.0);
  const auto n = Normalizer::power_law(2);
  const RatePoint r = rate_at(d, n, {-0.5, 1.25});
  CHECK(r.converged);
  CHECK(std::abs(r.rate.value()) < 1e-14);
  CHECK(r.tilt.vec().norm() < 1e-8);
}

TEST_CASE("rate matches the Gaussian profile oracle") {
  const auto d = ScalarDistribution::gaussian(-0.5, 1.0);
  const auto n = Normalizer::power_law(2);
  for (Eigen::Vector2d a : {Eigen::Vector2d(0.56711, 0.71645), Eigen::Vector2d(1.0, 1.5), Eigen::Vector2d(-2.0, 5.0),
                            Eigen::Vector2d(0.0, 0.3)}) {
    const RatePoint r = rate_at(d, n, a);
    REQUIRE(r.converged);
    CHECK(r.residual <= 1e-9);
    CHECK(r.rate.value() == doctest::Approx(gaussian_p2_rate(-0.5, 1.0, a(0), a(1))).epsilon(1e-9));
    CHECK(std::abs(r.rate.value() - (a.dot(r.tilt.vec()) - cumulant(d, n, r.tilt).value())) < 1e-10);
  }
}

TEST_CASE("rate at the dominating point of the z = 0.67 boundary") {
  const auto d = ScalarDistribution::gaussian(-0.5, 1.0);
  const auto n = Normalizer::power_law(2);
  const BoundaryChart chart(0.67, n);
  const RatePoint r = rate_at(d, n, chart.point(0.56711));
  REQUIRE(r.converged);
  CHECK(std::abs(r.rate.value() - 0.72) <= 0.02);
  CHECK(r.rate.value() == doctest::Approx(0.7314232).epsilon(1e-6));
}

TEST_CASE("atom at zero gives -ln P(X=0) at the origin") {
  for (double r0 : {0.5, 0.2, 0.9}) {
    const double rest = (1 - r0) / 2;
    const auto d = ScalarDistribution::finite({{-1, rest}, {0, r0}, {2, rest}});
    const RatePoint r = rate_at(d, Normalizer::power_law(2), {0.0, 0.0});
    CHECK(r.converged);
    CHECK(r.rate.value() == doctest::Approx(-std::log(r0)).epsilon(1e-7));
  }
}

TEST_CASE("two-point laws are rejected as degenerate") {
  CHECK_THROWS_AS(rate_at(ScalarDistribution::two_point(-1, 1, 0.5), Normalizer::power_law(2), {0.0, 1.0}),
                  DegeneracyError);
}

TEST_CASE("points outside the convex hull report a lower bound") {
  const auto d = ScalarDistribution::finite({{-1, .25}, {0, .5}, {2, .25}});
  const RatePoint r = rate_at(d, Normalizer::power_law(2), {5.0, 0.0});
  CHECK_FALSE(r.converged);
  CHECK(r.rate.is_plus_infinity());
  CHECK(r.lower_bound > 0.0);
}

TEST_CASE("no ascent direction at converged points") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const auto& f : families()) {
    if (f.name == "two_point") continue;
    CAPTURE(f.name);
    for (const auto& a : interior_alphas(f, 10, rng)) {
      const RatePoint r = rate_at(f.dist, f.norm, a);
      REQUIRE(r.converged);
      const double val = r.rate.value();
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector2d dir(g(rng), g(rng));
        dir.normalize();
        const Eigen::Vector2d l0 = r.tilt.vec();
        const double best = golden_max(
            [&](double s) {
              const double v = objective(f.dist, f.norm, a, l0 + s * dir);
              return std::isfinite(v) ? v : -1e300;
            },
            -0.5, 0.5, 200);
        CHECK(best <= val + 1e-10);
      }
    }
  }
}

TEST_CASE("rate is convex along segments") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& f : families()) {
    if (f.name == "two_point") continue;
    CAPTURE(f.name);
    const auto pts = interior_alphas(f, 12, rng);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
      const RatePoint ra = rate_at(f.dist, f.norm, pts[i]);
      const RatePoint rb = rate_at(f.dist, f.norm, pts[i + 1]);
      REQUIRE(ra.converged);
      REQUIRE(rb.converged);
      const double s = u(rng);
      const RatePoint rm = rate_at(f.dist, f.norm, s * pts[i] + (1 - s) * pts[i + 1]);
      if (!rm.converged) continue;
      CHECK(rm.rate.value() <= s * ra.rate.value() + (1 - s) * rb.rate.value() + 1e-8);
    }
  }
}

TEST_CASE("gradient of the rate is the tilt") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  const double h = 1e-5;
  for (const auto& f : families()) {
    if (f.name == "two_point") continue;
    CAPTURE(f.name);
    for (const auto& a : interior_alphas(f, 6, rng)) {
      const RatePoint r = rate_at(f.dist, f.norm, a);
      REQUIRE(r.converged);
      Eigen::Vector2d dir(g(rng), g(rng));
      dir.normalize();
      const double predicted = h * r.tilt.vec().dot(dir);
      if (std::abs(predicted) < 1e-9) continue;
      const RatePoint rp = rate_at(f.dist, f.norm, a + h * dir, {.start = r.tilt});
      const RatePoint rm = rate_at(f.dist, f.norm, a - h * dir, {.start = r.tilt});
      REQUIRE(rp.converged);
      REQUIRE(rm.converged);
      const double change = 0.5 * (rp.rate.value() - rm.rate.value());
      CHECK(std::abs(change - predicted) <= 1e-3 * std::abs(predicted));
    }
  }
}

TEST_CASE("rate is non-decreasing along rays from the mean") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  for (const auto& f : families()) {
    if (f.name == "two_point") continue;
    CAPTURE(f.name);
    const Eigen::Vector2d mean(f.dist.mean().value(), expected_normalizer(f.dist, f.norm).value());
    for (int ray = 0; ray < 10; ++ray) {
      Eigen::Vector2d dir(g(rng), g(rng));
      dir.normalize();
      double prev = 0.0;
      for (int k = 1; k <= 20; ++k) {
        const RatePoint r = rate_at(f.dist, f.norm, mean + 0.1 * k * dir);
        if (!r.converged) break;
        CHECK(r.rate.value() >= prev - 1e-12);
        prev = r.rate.value();
      }
    }
  }
}

TEST_CASE("univariate rate of a two-valued projection") {
  // xi = X - 1 with X = +-1: values -2 and 0, target -0.5 is success frequency 0.75.
  const auto d = ScalarDistribution::two_point(-1, 1, 0.5);
  const auto n = Normalizer::power_law(2);
  UnivariateLaw law{[&](double l) { return cumulant(d, n, {l, -l}); }, ExtendedReal::finite(-1.0)};
  const UnivariateRate r = univariate_rate(law, -0.5);
  const double want = 0.75 * std::log(0.75 / 0.5) + 0.25 * std::log(0.25 / 0.5);
  CHECK(r.rate.value() == doctest::Approx(want).epsilon(1e-10));
  CHECK(r.rate.value() == doctest::Approx(0.1308123).epsilon(1e-6));
  CHECK(r.lambda == doctest::Approx(std::log(3.0) / 2.0).epsilon(1e-6));
  CHECK_FALSE(r.boundary);
}

TEST_CASE("univariate rate attained only at infinity") {
  const auto d = ScalarDistribution::finite({{1.0, 0.3}, {0.0, 0.7}});
  const auto n = Normalizer::power_law(2);
  // xi = 2X - X^2: 1 with probability 0.3, 0 otherwise; target a = 1.
  UnivariateLaw law{[&](double l) { return cumulant(d, n, {2 * l, -l}); }, ExtendedReal::finite(0.3)};
  const UnivariateRate r = univariate_rate(law, 1.0);
  CHECK(r.boundary);
  CHECK(r.rate.value() == doctest::Approx(-std::log(0.3)).epsilon(1e-9));
}

TEST_CASE("univariate rate beyond the support") {
  const auto d = ScalarDistribution::finite({{1.0, 0.3}, {0.0, 0.7}});
  const auto n = Normalizer::power_law(2);
  UnivariateLaw law{[&](double l) { return cumulant(d, n, {2 * l, -l}); }, ExtendedReal::finite(0.3)};
  const UnivariateRate r = univariate_rate(law, 1.5);
  CHECK(r.boundary);
  CHECK(r.rate.is_plus_infinity());
}

TEST_CASE("univariate rate refuses typical targets") {
  UnivariateLaw law{[](double l) { return ExtendedReal::finite(0.5 * l * l); }, ExtendedReal::finite(0.0)};
  CHECK_THROWS_AS(univariate_rate(law, -1.0), PreconditionError);
  CHECK(univariate_rate(law, 2.0).rate.value() == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("contour grid") {
  const auto d = ScalarDistribution::gaussian(-0.5, 1.0);
  const auto n = Normalizer::power_law(2);

  SUBCASE("single cell at the mean") {
    const ContourGrid g = contour(d, n, {{-0.5, -0.5}, {1.25, 1.25}, 1, 1});
    REQUIRE(g.cells.size() == 1);
    CHECK(std::abs(g.at(0, 0).rate.value()) < 1e-14);
  }

  SUBCASE("minimum over the boundary") {
    const GridSpec spec{{-1.5, 1.5}, {0.1, 3.0}, 121, 59};
    const ContourGrid g = contour(d, n, spec);
    double best = INFINITY;
    for (int i2 = 0; i2 < spec.n2; ++i2)
      for (int i1 = 0; i1 < spec.n1; ++i1)
        if (in_target_set({g.x1s[i1], g.x2s[i2]}, 0.67, n) && g.at(i1, i2).converged)
          best = std::min(best, g.at(i1, i2).rate.value());
    CHECK(std::abs(best - 0.72) <= 0.03);
  }

  SUBCASE("evaluation order and threading") {
    const GridSpec spec{{-1.5, 1.5}, {0.1, 3.0}, 13, 11};
    const ContourGrid a = contour(d, n, spec, EvalOrder::row_major);
    const ContourGrid b = contour(d, n, spec, EvalOrder::column_major);
    const ContourGrid c = contour(d, n, spec, EvalOrder::row_major, 4);
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
      REQUIRE(a.cells[k].converged == b.cells[k].converged);
      if (!a.cells[k].converged) continue;
      CHECK(std::abs(a.cells[k].rate.value() - b.cells[k].rate.value()) <= 1e-12);
      CHECK(std::abs(a.cells[k].rate.value() - c.cells[k].rate.value()) <= 1e-12);
    }
  }

  SUBCASE("csv") {
    const auto fin = ScalarDistribution::finite({{-1, .25}, {0, .5}, {2, .25}});
    const ContourGrid g = contour(fin, n, {{0.0, 5.0}, {0.0, 1.0}, 2, 2});
    const std::string csv = contour_csv(g);
    CHECK(csv.rfind("x1,x2,rate\n", 0) == 0);
    CHECK(csv.find("5,1,inf\n") != std::string::npos);
    CHECK(csv.find("0,0,0.6931471805") != std::string::npos);
  }
}
