#include <Eigen/LU>
#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/exact_prefactor.hpp"
#include "selfnorm/legendre.hpp"
#include "selfnorm/rng.hpp"
#include "selfnorm/shao_rate.hpp"

using namespace selfnorm;

namespace {

const ScalarDistribution ref_law = ScalarDistribution::gaussian(-0.5, 1.0);
const Normalizer quad = Normalizer::power_law(2);

Eigen::Vector2d fig_point() { return j_boundary(ref_law, quad, 0.67).alpha_hat; }

// Level line of Lambda through alpha_hat, alpha2 as a function of alpha1,
// solved by Newton in alpha2 from a start on the tangent.
double level_line(const ScalarDistribution& d, const Normalizer& n, double level, double x, double start) {
  double a2 = start;
  NewtonOptions opts;
  for (int it = 0; it < 40; ++it) {
    const RatePoint r = rate_at(d, n, {x, a2}, opts);
    REQUIRE(r.converged);
    opts.start = r.tilt;
    const double step = (r.rate.value() - level) / r.tilt.lambda2;
    a2 -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(a2))) break;
  }
  return a2;
}

}  // namespace

TEST_CASE("tilted covariance") {
  const auto g = ScalarDistribution::gaussian(0, 1);
  SUBCASE("gaussian moments at zero tilt") {
    const Eigen::Matrix2d s = tilted_covariance_at(g, quad, {0, 0});
    CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(s(0, 1)) <= 1e-10);
    CHECK(s(1, 1) == doctest::Approx(2.0).epsilon(1e-10));
    const Eigen::Matrix2d via_alpha = tilted_covariance(g, quad, {0.0, 1.0});
    CHECK((via_alpha - s).norm() <= 1e-8);
  }
  SUBCASE("exactly symmetric") {
    const Eigen::Matrix2d s = tilted_covariance(ref_law, quad, fig_point());
    CHECK(s(0, 1) == s(1, 0));
    const Eigen::Matrix2d f = tilted_covariance_at(ScalarDistribution::pareto(1, 3, -1.6), quad, {0.7, -0.4});
    CHECK(f(0, 1) == f(1, 0));
  }
  SUBCASE("two-point law is singular") {
    CHECK_THROWS_AS(tilted_covariance_at(ScalarDistribution::two_point(-1, 2, 0.3), quad, {0.2, -0.1}),
                    DegeneracyError);
  }
  SUBCASE("matches the sample covariance of tilted draws") {
    struct Case {
      ScalarDistribution d;
      Normalizer n;
      TiltVector lam;
    };
    const std::vector<Case> cases{{ScalarDistribution::pareto(1, 3, -1.6), quad, {0.7, -0.4}},
                                  {ScalarDistribution::gaussian(-0.5, 1), Normalizer::power_law(3), {1.2, -0.3}},
                                  {ScalarDistribution::finite({{-1, 0.25}, {0, 0.5}, {2, 0.25}}), quad, {0.4, -0.2}}};
    int idx = 0;
    for (const Case& c : cases) {
      const Eigen::Matrix2d s = tilted_covariance_at(c.d, c.n, c.lam);
      const TiltedSampler sampler(c.d, c.n, c.lam);
      RngStream rng(77, idx++);
      const int N = 1000000;
      std::vector<Eigen::Vector2d> z(N);
      Eigen::Vector2d m = Eigen::Vector2d::Zero();
      for (auto& v : z) {
        const double x = sampler(rng);
        v = {x, c.n(x)};
        m += v;
      }
      m /= N;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double sum = 0, sq = 0;
          for (const auto& v : z) {
            const double t = (v(i) - m(i)) * (v(j) - m(j));
            sum += t;
            sq += t * t;
          }
          const double mean = sum / N;
          const double se = std::sqrt((sq / N - mean * mean) / N);
          CAPTURE(idx);
          CHECK(std::abs(mean - s(i, j)) <= 4 * se);
        }
    }
  }
}

TEST_CASE("projected variance") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (int i = 0; i < 20; ++i) {
    const double a = ang(gen);
    CHECK(projected_variance(Eigen::Matrix2d::Identity(), {std::cos(a), std::sin(a)}) == doctest::Approx(1.0));
  }
  Eigen::Matrix2d d;
  d << 4, 0, 0, 1;
  CHECK(projected_variance(d, {1, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  Eigen::Matrix2d s;
  s << 2.0, 0.7, 0.7, 1.5;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d e(std::cos(ang(gen)), 0);
    const Eigen::Vector2d u = Eigen::Vector2d(std::cos(ang(gen)), std::sin(ang(gen)));
    CHECK(std::abs(projected_variance(s, u) - projected_variance(s, -u)) <= 1e-14);
    // Oracle: conditional variance of the component along ebar given e.
    const Eigen::Vector2d eb(-u(1), u(0));
    Eigen::Matrix2d basis;
    basis.row(0) = u;
    basis.row(1) = eb;
    const Eigen::Matrix2d r = basis * s * basis.transpose();
    CHECK(projected_variance(s, u) == doctest::Approx(r(1, 1) - r(0, 1) * r(0, 1) / r(0, 0)).epsilon(1e-13));
    (void)e;
  }
  CHECK_THROWS_AS(projected_variance(Eigen::Matrix2d::Zero(), {1, 0}), DegeneracyError);
}

TEST_CASE("curvature condition and sigma^2 at the z = 0.67 gaussian point") {
  const Eigen::Vector2d a = fig_point();
  const CurvatureCheck c = curvature_condition(ref_law, quad, 0.67, a);
  CHECK(c.holds);
  CHECK_FALSE(c.inconclusive);
  CHECK(c.rhs == doctest::Approx(2 * std::pow(0.67, -2)));
  const SigmaSq s = sigma_sq(ref_law, quad, 0.67, a);
  CHECK(s.sigma_sq > 0);
  CHECK(s.sigma_sq < 1);
  CHECK(s.chi_star == doctest::Approx(1 / std::sqrt(1 - s.sigma_sq)));
  CHECK(s.d11 == doctest::Approx(c.rhs));
}

TEST_CASE("curvature margin agrees with a traced level line") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int k = 0; k < 10; ++k) {
    ScalarDistribution d = ScalarDistribution::gaussian(0, 1);
    double p = 2;
    if (k < 6) {
      d = ScalarDistribution::gaussian(-1 + 1.3 * unif(gen), 0.6 + 0.9 * unif(gen));
    } else {
      std::vector<Atom> atoms;
      double x = -1.5 - unif(gen);
      for (int i = 0; i < 3; ++i) {
        atoms.push_back({x, 0.25});
        x += 0.4 + 1.2 * unif(gen);
      }
      atoms.push_back({std::max(x, 0.5), 0.25});
      d = ScalarDistribution::finite(atoms);
      p = 1.5 + 1.5 * unif(gen);
    }
    const Normalizer n = Normalizer::power_law(p);
    const double zs = z_star(d, n);
    const double z = zs + (1 - zs) * (0.2 + 0.6 * unif(gen));
    CAPTURE(d.describe());
    CAPTURE(p);
    CAPTURE(z);
    const BoundarySolution sol = j_boundary(d, n, z);
    if (sol.at_origin) continue;
    const Eigen::Vector2d a = sol.alpha_hat;
    const CurvatureCheck c = curvature_condition(d, n, z, a);
    REQUIRE_FALSE(c.inconclusive);

    const double h = 1e-4;
    const double slope = p * std::pow(z, -p) * std::pow(a(0), p - 1);
    const double level = sol.rate;
    const double up = level_line(d, n, level, a(0) + h, a(1) + slope * h);
    const double dn = level_line(d, n, level, a(0) - h, a(1) - slope * h);
    const double mid = level_line(d, n, level, a(0), a(1));
    const double g2 = (up - 2 * mid + dn) / (h * h);
    CHECK(std::abs(g2 - c.lhs) <= 1e-3 * std::max(1.0, std::abs(c.lhs)));
    CHECK((g2 - c.rhs > 0) == (c.margin > 0));
    if (c.holds) {
      const SigmaSq s = sigma_sq(d, n, z, a);
      CHECK(s.sigma_sq < 1);
    } else {
      CHECK_THROWS_AS(sigma_sq(d, n, z, a), RegimeError);
    }
  }
}

TEST_CASE("hessians of Lambda and A are inverse") {
  struct Case {
    ScalarDistribution d;
    Normalizer n;
    Eigen::Vector2d a;
  };
  const std::vector<Case> cases{{ref_law, quad, fig_point()},
                                {ScalarDistribution::finite({{-1, 0.25}, {0, 0.5}, {2, 0.25}}), quad, {0.4, 1.2}},
                                {ScalarDistribution::pareto(1, 3, -1.6), Normalizer::power_law(2.5), {0.5, 2.0}}};
  for (const Case& c : cases) {
    const double h = 1e-4;
    Eigen::Matrix2d hl;
    for (int i = 0; i < 2; ++i) {
      const Eigen::Vector2d step = h * Eigen::Vector2d::Unit(i);
      const RatePoint plus = rate_at(c.d, c.n, c.a + step), minus = rate_at(c.d, c.n, c.a - step);
      REQUIRE(plus.converged);
      REQUIRE(minus.converged);
      hl.col(i) = (plus.tilt.vec() - minus.tilt.vec()) / (2 * h);
    }
    const Eigen::Matrix2d prod = hl * tilted_covariance(c.d, c.n, c.a);
    CHECK((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("chi star") {
  CHECK(chi_star(0.0) == 1.0);
  CHECK_THROWS_AS(chi_star(1.0), RegimeError);
  CHECK_THROWS_AS(chi_star(-0.1), RegimeError);
  RngStream rng(3, 0);
  const long N = 10000000;
  double sum = 0;
  for (long i = 0; i < N; ++i) {
    const double y = rng.normal();
    sum += std::exp(0.25 * y * y);
  }
  CHECK(std::abs(sum / N / chi_star(0.5) - 1) <= 0.01);
}

TEST_CASE("exact asymptotics") {
  const PrefactorReport r = prefactor_report(ref_law, quad, 0.67);
  CHECK(r.curvature_ok);
  CHECK(r.unique_ok);
  CHECK(r.j_z == doctest::Approx(-0.7314232).epsilon(1e-6));
  CHECK(std::abs(r.e.norm() - 1) <= 1e-15);
  CHECK(r.e(1) < 0);

  double prev = std::numeric_limits<double>::infinity();
  for (long n : {50L, 200L, 800L}) {
    const double gap = std::abs(asymptotic_estimate(r, n).log_value / n - r.j_z);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.05);

  for (long n : {10L, 100L, 1000L}) {
    const double d = asymptotic_estimate(r, 4 * n).log_value - asymptotic_estimate(r, n).log_value;
    CHECK(std::abs(d - (3 * n * r.j_z - std::log(2.0))) <= 1e-12 * std::max(1.0, std::abs(3 * n * r.j_z)));
  }

  const AsymptoticEstimate e = asymptotic_estimate(ref_law, quad, 0.67, 200);
  CHECK(e.log_value == doctest::Approx(asymptotic_estimate(r, 200).log_value).epsilon(1e-12));
  CHECK(e.value == doctest::Approx(std::exp(e.log_value)));
  const auto j = nlohmann::json::parse(to_json(e));
  for (const char* key : {"alpha_hat", "tilt", "Sigma", "Sigma_tilde11", "D11", "sigma_sq", "chi_star", "J_z",
                          "prefactor", "value", "curvature_ok", "unique_ok"})
    CHECK(j.contains(key));
  CHECK(j["Sigma"][0][1] == j["Sigma"][1][0]);
}

TEST_CASE("regime guards") {
  CHECK_THROWS_AS(prefactor_report(ScalarDistribution::two_point(-1, 1, 0.5), quad, 0.5), DegeneracyError);
  CHECK_THROWS_AS(prefactor_report(ScalarDistribution::finite({{-1, 0.25}, {0, 0.5}, {2, 0.25}}), quad, 0.95),
                  RegimeError);
  CHECK_THROWS_AS(asymptotic_estimate(prefactor_report(ref_law, quad, 0.67), 0), PreconditionError);
  CHECK_THROWS_AS(prefactor_report(ref_law, Normalizer::custom([](double x) { return x * x; }), 0.67), PreconditionError);
}
