#include <atomic>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "selfnorm/errors.hpp"
#include "selfnorm/exact_prefactor.hpp"
#include "selfnorm/exact_twopoint.hpp"
#include "selfnorm/shao_rate.hpp"
#include "selfnorm/simulate.hpp"

using namespace selfnorm;

namespace {

const Normalizer quad = Normalizer::power_law(2);
const ScalarDistribution coin = ScalarDistribution::two_point(-1, 1, 0.5);
const ScalarDistribution ref_law = ScalarDistribution::gaussian(-0.5, 1.0);

double joint_se(const McEstimate& a, const McEstimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace

TEST_CASE("direct simulation") {
  SUBCASE("coin flips, n = 4") {
    const McEstimate e = direct_mc(coin, quad, 0.5, 4, {1000000, 42, 0});
    CHECK(e.method == McMethod::direct);
    CHECK(std::abs(e.value - 0.3125) <= 4 * 0.00046);
    CHECK(std::abs(e.value - 0.3125) <= 4 * e.std_error);
    CHECK(exact_prob(-1, 1, 0.5, 2.0, 0.5, 4) == doctest::Approx(0.3125));
  }
  SUBCASE("z > 1 without an atom at zero") {
    const McEstimate e = direct_mc(ref_law, quad, 1.2, 5, {20000, 1, 0});
    CHECK(e.hits == 0);
    CHECK(e.value == 0.0);
  }
  SUBCASE("z > 1 keeps only all-zero paths") {
    const auto d = ScalarDistribution::finite({{-1.0, 0.3}, {0.0, 0.3}, {2.0, 0.4}});
    const McEstimate e = direct_mc(d, quad, 2.0, 5, {10000000, 9, 0});
    CHECK(std::abs(e.value - std::pow(0.3, 5)) <= 4 * e.std_error);
  }
}

TEST_CASE("holder bound on every simulated path") {
  for (double p : {1.5, 2.0, 3.0}) {
    const Normalizer n = Normalizer::power_law(p);
    std::atomic<long> bad{0};
    const long steps = 7;
    auto check = [&](double s, double t) {
      if (t > 0 && std::abs(s) > std::pow(steps, 1 - 1 / p) * std::pow(t, 1 / p) * (1 + 1e-12)) ++bad;
      return true;
    };
    tilted_path_mc(ScalarDistribution::pareto(1, 2.5, -1.7), n, steps, {0, 0}, check, {20000, 3, 0});
    tilted_path_mc(ScalarDistribution::finite({{-1, 0.2}, {0, 0.3}, {3, 0.5}}), n, steps, {0, 0}, check,
                   {20000, 4, 0});
    CHECK(bad == 0);
  }
}

TEST_CASE("importance sampling") {
  SUBCASE("agrees with direct and exact on coin flips, n = 20") {
    const McEstimate is = importance_mc(coin, quad, 0.5, 20, {200000, 5, 0});
    const McEstimate dm = direct_mc(coin, quad, 0.5, 20, {200000, 6, 0});
    CHECK(is.method == McMethod::importance);
    CHECK(std::abs(is.value - dm.value) <= 4 * joint_se(is, dm));
    const double exact = exact_prob(-1, 1, 0.5, 2.0, 0.5, 20);
    CHECK(std::abs(is.value - exact) <= 4 * is.std_error);
    CHECK(is.ess > 1000);
  }
  SUBCASE("gaussian with negative mean at z = 0.67, n = 200") {
    const McEstimate is = importance_mc(ref_law, quad, 0.67, 200, {1000000, 2026, 0});
    CHECK(is.rel_error < 0.02);
    const double t4 = asymptotic_estimate(ref_law, quad, 0.67, 200).value;
    CHECK(std::abs(is.value / t4 - 1) <= 0.10);
  }
  SUBCASE("full event has unit mean for any tilt") {
    auto all = [](double, double) { return true; };
    for (TiltVector lam : {TiltVector{0.3, -0.1}, TiltVector{-0.2, -0.2}}) {
      const McEstimate e = tilted_path_mc(ref_law, quad, 10, lam, all, {100000, 8, 0});
      CHECK(e.hits == e.trials);
      CHECK(std::abs(e.value - 1) <= 4 * e.std_error);
    }
    const McEstimate untilted = tilted_path_mc(ref_law, quad, 10, {0, 0}, all, {1000, 8, 0});
    CHECK(untilted.value == 1.0);
  }
  SUBCASE("preconditions") {
    const auto d = ScalarDistribution::finite({{-1, 0.25}, {0, 0.5}, {2, 0.25}});
    CHECK_THROWS_AS(importance_mc(d, quad, 0.95, 10, {100, 1, 0}), PreconditionError);
    CHECK_THROWS_AS(importance_mc(ref_law, quad, 1.0, 10, {100, 1, 0}), PreconditionError);
    CHECK_THROWS_AS(direct_mc(ref_law, quad, 0.5, 10, {0, 1, 0}), PreconditionError);
    CHECK_THROWS_AS(direct_mc(ref_law, quad, 0.5, 0, {10, 1, 0}), PreconditionError);
  }
}

TEST_CASE("reproducibility") {
  const McEstimate a = importance_mc(ref_law, quad, 0.67, 30, {50000, 77, 1});
  const McEstimate b = importance_mc(ref_law, quad, 0.67, 30, {50000, 77, 3});
  const McEstimate c = importance_mc(ref_law, quad, 0.67, 30, {50000, 77, 8});
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);
  CHECK(a.ess == c.ess);
  const McEstimate d = direct_mc(coin, quad, 0.5, 12, {60000, 77, 1});
  const McEstimate e = direct_mc(coin, quad, 0.5, 12, {60000, 77, 5});
  CHECK(d.hits == e.hits);
  const McEstimate other = importance_mc(ref_law, quad, 0.67, 30, {50000, 78, 0});
  CHECK(other.value != a.value);
  CHECK(std::abs(other.value - a.value) <= 4 * joint_se(a, other));
}

TEST_CASE("empirical log rates") {
  SUBCASE("gaussian approaches J_z") {
    const double j = -j_boundary(ref_law, quad, 0.67).rate;
    const auto trend = rate_trend(ref_law, quad, 0.67, {50, 100, 200, 400}, {200000, 11, 0});
    REQUIRE(trend.size() == 4);
    double prev = 1e9;
    for (const TrendPoint& tp : trend) {
      const double gap = std::abs(tp.log_rate - j);
      CAPTURE(tp.n);
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 0.03);
  }
  SUBCASE("coin flips track the exact probability") {
    for (const TrendPoint& tp : rate_trend(coin, quad, 0.5, {10, 20, 40, 80}, {100000, 12, 0})) {
      const double exact = log_exact_prob(-1, 1, 0.5, quad, 0.5, tp.n) / tp.n;
      CAPTURE(tp.n);
      CHECK(std::abs(tp.log_rate - exact) <= 4 * tp.estimate.rel_error / tp.n);
    }
  }
  SUBCASE("single step is the sign of X") {
    const auto tp = rate_trend(ref_law, quad, 0.67, {1}, {400000, 13, 0}).front();
    const double want = 0.5 * std::erfc(0.5 / std::sqrt(2.0));
    CHECK(std::abs(tp.estimate.value - want) <= 4 * tp.estimate.std_error);
    CHECK(std::abs(tp.log_rate - std::log(want)) <= 4 * tp.estimate.rel_error);
  }
}

TEST_CASE("csv") {
  const McEstimate e = direct_mc(coin, quad, 0.5, 4, {1000, 3, 0});
  CHECK(mc_csv_header() == "method,n,trials,seed,estimate,std_error,ess");
  const std::string line = mc_csv_row(e);
  std::istringstream row(line);
  std::string method;
  std::getline(row, method, ',');
  CHECK(method == "direct");
  CHECK(std::count(line.begin(), line.end(), ',') == 6);
}
