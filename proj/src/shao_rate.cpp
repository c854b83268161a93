#include "selfnorm/shao_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "optimize.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/exact_twopoint.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/legendre.hpp"

namespace selfnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
  ExtendedReal ex;
  ExtendedReal eu;
};

// Law of xi = c1 X - c2 u(X) with c2 > 0.
UnivariateLaw linear_law(const ScalarDistribution& dist, const Normalizer& norm, const Moments& mom, double c1,
                         double c2) {
  UnivariateLaw law;
  law.log_mgf = [&dist, &norm, c1, c2](double l) { return cumulant(dist, norm, {l * c1, -l * c2}); };
  if (mom.eu.is_plus_infinity()) {
    law.mean = ExtendedReal::minus_infinity();
  } else if (!mom.ex.is_finite()) {
    law.mean = c1 == 0.0 ? ExtendedReal::finite(-c2 * mom.eu.value()) : (c1 > 0 ? mom.ex : -mom.ex);
  } else {
    law.mean = ExtendedReal::finite(c1 * mom.ex.value() - c2 * mom.eu.value());
  }
  return law;
}

// inf_{t >= 0} ln E e^{t (xi - a)}; 0 when the infimum sits at t = 0.
double inner_inf(const UnivariateLaw& law, double a) {
  try {
    const UnivariateRate r = univariate_rate(law, a);
    return r.rate.is_plus_infinity() ? -kInf : -r.rate.value();
  } catch (const PreconditionError&) {
    return 0.0;
  }
}

ExtendedReal log_prob_zero(const ScalarDistribution& dist) {
  const double p0 = dist.prob_zero();
  return p0 > 0.0 ? ExtendedReal::finite(std::log(p0)) : ExtendedReal::minus_infinity();
}

void check_regime(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  if (!std::isfinite(z) || !(z > 0.0)) throw PreconditionError("z must be positive and finite");
  const double zs = z_star(dist, norm);
  if (!(z > zs)) throw PreconditionError("z = " + std::to_string(z) + " is not above z* = " + std::to_string(zs));
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

// Grid scan plus refinement; the grid grows upward while the best value sits
// at its top end.
double outer_sup(const std::function<double(double)>& f, std::vector<double> grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double x : grid) values.push_back(f(x));
  for (int ext = 0; ext < 40; ++ext) {
    const auto best = std::max_element(values.begin(), values.end());
    if (best + 1 != values.end() || !(*best > -kInf)) break;
    grid.push_back(grid.back() * 2.0);
    values.push_back(f(grid.back()));
  }
  const auto ext = detail::multistart_max(f, grid, values, 5);
  if (ext.empty()) return -kInf;
  return ext.front().value;
}

double y_upper(const ScalarDistribution& dist) {
  return std::clamp(dist.abs_quantile(0.9999), 1e-3, 1e4);
}

BoundarySolution origin_solution(const ScalarDistribution& dist) {
  BoundarySolution s;
  s.at_origin = true;
  const double p0 = dist.prob_zero();
  s.rate = p0 > 0.0 ? -std::log(p0) : kInf;
  s.tilt = {0.0, -kInf};
  return s;
}

BoundarySolution two_point_boundary(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  const auto atoms = dist.atoms();
  const double a = atoms[0].value, b = atoms[1].value, q = atoms[1].prob;
  const ThresholdSolution th = thresholds(a, b, q, norm, z);
  if (th.case_tag == TwoPointCase::trivial_b_nonpos) return origin_solution(dist);

  const Eigen::Vector2d za(a, norm(a)), zb(b, norm(b));
  const Eigen::Vector2d d = zb - za;
  auto solution_at = [&](double t) {
    BoundarySolution s;
    s.alpha_hat = za + t * d;
    s.y_hat = s.alpha_hat(0);
    s.rate = binary_rate(t, q);
    const double lam = binary_tilt(t, q).to_double();
    s.tilt = TiltVector::from(lam * d / d.squaredNorm());
    s.at_origin = s.alpha_hat.isZero();
    return s;
  };
  BoundarySolution best = solution_at(th.t_plus);
  if (th.case_tag != TwoPointCase::a_neg) {
    const BoundarySolution lower = solution_at(th.t_minus);
    if (std::abs(lower.rate - best.rate) <= 1e-6) best.unique_flag = false;
    if (lower.rate < best.rate) {
      const bool unique = best.unique_flag;
      best = lower;
      best.unique_flag = unique;
    }
  }
  return best;
}

ExtendedReal negate(double rate) { return rate == kInf ? ExtendedReal::minus_infinity() : ExtendedReal::finite(-rate); }

}  // namespace

ExtendedReal j_supinf(const ScalarDistribution& dist, double p, double z) {
  if (!(p > 1.0)) throw PreconditionError("p must exceed 1");
  const Normalizer norm = Normalizer::power_law(p);
  if (z > 1.0) return log_prob_zero(dist);
  check_regime(dist, norm, z);
  const Moments mom{dist.mean(), expected_normalizer(dist, norm)};
  const double k = z / p;
  auto f = [&](double c) {
    const double a = k * (p - 1.0) * std::pow(c, p / (p - 1.0));
    return inner_inf(linear_law(dist, norm, mom, c, k), a);
  };
  const double c0 = mom.ex.is_finite() ? std::max(1.0, std::abs(mom.ex.value())) : 1.0;
  std::vector<double> grid{0.0};
  for (int e = -20; e <= 12; ++e) grid.push_back(std::ldexp(c0, e));
  const double j = outer_sup(f, grid);
  return j == -kInf ? ExtendedReal::minus_infinity() : ExtendedReal::finite(std::min(0.0, j));
}

ExtendedReal j_halfplane(const ScalarDistribution& dist, double p, double z) {
  if (!(p > 1.0)) throw PreconditionError("p must exceed 1");
  const Normalizer norm = Normalizer::power_law(p);
  if (z > 1.0) return log_prob_zero(dist);
  check_regime(dist, norm, z);
  auto f = [&](double y) { return inner_inf(projected_jump_law(dist, y, z, p), normal_and_offset(y, z, p).offset); };
  std::vector<double> grid{0.0};
  for (double y : log_grid(1e-4, y_upper(dist), 48)) grid.push_back(y);
  const double j = outer_sup(f, grid);
  return j == -kInf ? ExtendedReal::minus_infinity() : ExtendedReal::finite(std::min(0.0, j));
}

BoundarySolution j_boundary(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  check_regime(dist, norm, z);
  if (!(z < 1.0)) throw PreconditionError("boundary minimization needs z < 1");
  if (is_degenerate(dist, norm))
    throw DegeneracyError("(X, u(X)) is supported on a line; use the exact two-point route");

  // No positive mass: only the origin can be reached.
  if (dist.prob_positive() == 0.0) return origin_solution(dist);

  const BoundaryChart chart(z, norm);
  TiltVector warm{0.0, -1.0};
  bool have_warm = false;
  auto rate_on_boundary = [&](double y, RatePoint* out = nullptr) {
    NewtonOptions opts;
    if (have_warm) opts.start = warm;
    const RatePoint r = rate_at(dist, norm, chart.point(y), opts);
    if (r.converged) {
      warm = r.tilt;
      have_warm = true;
    }
    if (out) *out = r;
    return r.converged ? r.rate.value() : kInf;
  };
  auto neg = [&](double y) { return -rate_on_boundary(y); };

  const double y_max = y_upper(dist);
  std::vector<double> grid = log_grid(1e-4, y_max, 60);
  // Finite support can leave only a thin feasible window on the boundary.
  if (dist.is_discrete())
    for (int i = 1; i < 160; ++i) grid.push_back(y_max * i / 160);
  std::sort(grid.begin(), grid.end());
  std::vector<double> values;
  for (double y : grid) values.push_back(neg(y));
  for (int ext = 0; ext < 40; ++ext) {
    const auto best = std::max_element(values.begin(), values.end());
    if (best + 1 != values.end() || !(*best > -kInf)) break;
    grid.push_back(grid.back() * 2.0);
    values.push_back(neg(grid.back()));
  }
  const auto minima = detail::multistart_max(neg, grid, values, 5);

  BoundarySolution origin = origin_solution(dist);
  if (minima.empty()) {
    if (origin.rate < kInf) return origin;
    throw NumericFailure("no boundary point of the target set gave a converged rate", kInf);
  }

  const detail::Extremum& top = minima.front();
  BoundarySolution s;
  RatePoint rp;
  s.rate = rate_on_boundary(top.x, &rp);
  s.y_hat = top.x;
  s.alpha_hat = chart.point(top.x);
  s.tilt = rp.tilt;
  for (std::size_t i = 1; i < minima.size(); ++i)
    if (std::abs(minima[i].value - top.value) <= 1e-6 && std::abs(minima[i].x - top.x) > 1e-6 * std::max(1.0, top.x))
      s.unique_flag = false;
  if (origin.rate < kInf && std::abs(origin.rate - s.rate) <= 1e-6) s.unique_flag = false;
  if (origin.rate < s.rate) {
    origin.unique_flag = s.unique_flag;
    return origin;
  }
  return s;
}

BoundarySolution dominating_point(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  try {
    return j_boundary(dist, norm, z);
  } catch (const DegeneracyError&) {
    if (!dist.is_discrete() || dist.atoms().size() > 2) throw;
    return dist.atoms().size() == 2 ? two_point_boundary(dist, norm, z) : origin_solution(dist);
  }
}

RateReport rate_report(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  RateReport r;
  r.z = z;
  r.norm = norm;
  if (norm.is_power_law()) {
    r.j_supinf = j_supinf(dist, norm.p(), z);
    r.j_halfplane = j_halfplane(dist, norm.p(), z);
  } else if (z > 1.0) {
    r.j_boundary = log_prob_zero(dist);
  }
  if (z < 1.0) {
    r.dominating = dominating_point(dist, norm, z);
    r.j_boundary = negate(r.dominating->rate);
  }
  std::vector<ExtendedReal> vals;
  for (const auto& v : {r.j_supinf, r.j_halfplane, r.j_boundary})
    if (v) vals.push_back(*v);
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      if (vals[i] == vals[j]) continue;
      const double d = vals[i].is_finite() && vals[j].is_finite() ? std::abs(vals[i].value() - vals[j].value()) : kInf;
      r.agreement = std::max(r.agreement, d);
    }
  return r;
}

namespace {

nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

nlohmann::json number(const std::optional<ExtendedReal>& v) {
  if (!v) return nullptr;
  return number(v->to_double());
}

}  // namespace

std::string to_json(const RateReport& report) {
  nlohmann::json j;
  j["z"] = report.z;
  j["p"] = report.norm.is_power_law() ? nlohmann::json(report.norm.p()) : nlohmann::json(nullptr);
  j["normalizer"] = report.norm.is_power_law() ? "power" : (report.norm.knots().empty() ? "custom" : "tabulated");
  j["J_supinf"] = number(report.j_supinf);
  j["J_halfplane"] = number(report.j_halfplane);
  j["J_boundary"] = number(report.j_boundary);
  if (report.dominating) {
    const BoundarySolution& d = *report.dominating;
    j["alpha_hat"] = {number(d.alpha_hat(0)), number(d.alpha_hat(1))};
    j["tilt"] = {number(d.tilt.lambda1), number(d.tilt.lambda2)};
    j["y_hat"] = d.y_hat;
    j["rate"] = number(d.rate);
    j["unique"] = d.unique_flag;
  } else {
    j["alpha_hat"] = nullptr;
    j["tilt"] = nullptr;
  }
  j["agreement"] = number(report.agreement);
  return j.dump(2);
}

}  // namespace selfnorm
