#include "selfnorm/exact_prefactor.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/legendre.hpp"
#include "selfnorm/shao_rate.hpp"

namespace selfnorm {

namespace {

TiltVector converged_tilt(const ScalarDistribution& dist, const Normalizer& norm, const Eigen::Vector2d& alpha) {
  const RatePoint r = rate_at(dist, norm, alpha);
  if (!r.converged) throw PreconditionError("Legendre transform did not converge at alpha_hat");
  return r.tilt;
}

double power_p(const Normalizer& norm) {
  if (!norm.is_power_law()) throw PreconditionError("exact prefactor needs a power-law normalizer");
  return norm.p();
}

// Gradient of V(alpha) = z^-p alpha1^p - alpha2 and its (1,1) second derivative.
Eigen::Vector2d grad_v(double p, double z, double a1) { return {p * std::pow(z, -p) * std::pow(a1, p - 1), -1.0}; }
double d11_of(double p, double z, double a1) { return p * (p - 1) * std::pow(z, -p) * std::pow(a1, p - 2); }

SigmaSq compose(double tilt_norm, double p, double z, double a1, const Eigen::Matrix2d& sigma) {
  SigmaSq s;
  const Eigen::Vector2d g = grad_v(p, z, a1);
  s.tilt_norm = tilt_norm;
  s.d11 = d11_of(p, z, a1);
  s.curvature = s.d11 / std::pow(g.norm(), 3);
  s.projected = projected_variance(sigma, g.normalized());
  s.sigma_sq = tilt_norm * s.curvature * s.projected;
  s.chi_star = chi_star(s.sigma_sq);
  return s;
}

}  // namespace

Eigen::Matrix2d tilted_covariance_at(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  const Eigen::Matrix2d h = cumulant_hess(dist, norm, lam);
  const double tr = h.trace();
  if (!(h.determinant() >= 1e-12 * tr * tr))
    throw DegeneracyError("tilted covariance is singular; the jump law is supported on a line");
  return h;
}

Eigen::Matrix2d tilted_covariance(const ScalarDistribution& dist, const Normalizer& norm,
                                  const Eigen::Vector2d& alpha_hat) {
  return tilted_covariance_at(dist, norm, converged_tilt(dist, norm, alpha_hat));
}

double projected_variance(const Eigen::Matrix2d& sigma, const Eigen::Vector2d& e_unit) {
  const Eigen::Vector2d eb(-e_unit(1), e_unit(0));
  const double ese = e_unit.dot(sigma * e_unit);
  if (!(ese > 0.0)) throw DegeneracyError("e Sigma e^T is not positive");
  const double cross = eb.dot(sigma * e_unit);
  return std::max(0.0, eb.dot(sigma * eb) - cross * cross / ese);
}

CurvatureCheck curvature_condition(const ScalarDistribution& dist, const Normalizer& norm, double z,
                                   const Eigen::Vector2d& alpha_hat) {
  const double p = power_p(norm);
  const TiltVector lam = converged_tilt(dist, norm, alpha_hat);
  const Eigen::Matrix2d hl = tilted_covariance_at(dist, norm, lam).inverse();
  const double a1 = alpha_hat(0);
  const double slope = p * std::pow(z, -p) * std::pow(a1, p - 1);
  CurvatureCheck c;
  c.rhs = d11_of(p, z, a1);
  if (lam.lambda2 == 0.0) {
    c.inconclusive = true;
    return c;
  }
  c.lhs = -(hl(0, 0) + 2 * hl(0, 1) * slope + hl(1, 1) * slope * slope) / lam.lambda2;
  c.margin = c.lhs - c.rhs;
  c.holds = c.margin > 0.0;
  return c;
}

double chi_star(double s) {
  if (!(s >= 0.0) || !(s < 1.0)) throw RegimeError("sigma^2 = " + std::to_string(s) + " is outside [0, 1)");
  return 1.0 / std::sqrt(1.0 - s);
}

SigmaSq sigma_sq(const ScalarDistribution& dist, const Normalizer& norm, double z, const Eigen::Vector2d& alpha_hat) {
  const double p = power_p(norm);
  const TiltVector lam = converged_tilt(dist, norm, alpha_hat);
  return compose(lam.vec().norm(), p, z, alpha_hat(0), tilted_covariance_at(dist, norm, lam));
}

PrefactorReport prefactor_report(const ScalarDistribution& dist, const Normalizer& norm, double z) {
  const double p = power_p(norm);
  if (is_degenerate(dist, norm))
    throw DegeneracyError("two-point law: use the exact binomial asymptotics instead");
  const BoundarySolution sol = j_boundary(dist, norm, z);
  if (sol.at_origin) throw RegimeError("dominating point is the origin; the rate is -ln P(X = 0)");

  PrefactorReport r;
  r.z = z;
  r.p = p;
  r.alpha_hat = sol.alpha_hat;
  r.j_z = -sol.rate;
  r.unique_ok = sol.unique_flag;
  r.tilt = converged_tilt(dist, norm, sol.alpha_hat);
  r.tilt_norm = r.tilt.vec().norm();
  r.sigma = tilted_covariance_at(dist, norm, r.tilt);
  r.e = grad_v(p, z, r.alpha_hat(0)).normalized();
  r.e_sigma_e = r.e.dot(r.sigma * r.e);
  r.curvature_check = curvature_condition(dist, norm, z, r.alpha_hat);
  r.curvature_ok = r.curvature_check.holds;
  if (!r.unique_ok) throw RegimeError("dominating point is not unique across multi-starts");
  if (r.curvature_check.inconclusive) throw RegimeError("curvature condition inconclusive: d Lambda / d alpha2 = 0");
  if (!r.curvature_ok)
    throw RegimeError("curvature condition fails: margin " + std::to_string(r.curvature_check.margin));
  const SigmaSq s = compose(r.tilt_norm, p, z, r.alpha_hat(0), r.sigma);
  r.sigma_tilde11 = s.projected;
  r.d11 = s.d11;
  r.curvature = s.curvature;
  r.sigma_sq = s.sigma_sq;
  r.chi_star = s.chi_star;
  return r;
}

AsymptoticEstimate asymptotic_estimate(const PrefactorReport& report, long n) {
  if (n < 1) throw PreconditionError("n must be positive");
  AsymptoticEstimate est;
  est.n = n;
  est.report = report;
  const double nd = static_cast<double>(n);
  est.log_prefactor =
      -0.5 * std::log(2 * std::numbers::pi * nd * (1 - report.sigma_sq) * report.e_sigma_e) - std::log(report.tilt_norm);
  est.log_value = nd * report.j_z + est.log_prefactor;
  est.prefactor = std::exp(est.log_prefactor);
  est.value = std::exp(est.log_value);
  return est;
}

AsymptoticEstimate asymptotic_estimate(const ScalarDistribution& dist, const Normalizer& norm, double z, long n) {
  return asymptotic_estimate(prefactor_report(dist, norm, z), n);
}

std::string to_json(const AsymptoticEstimate& est) {
  const PrefactorReport& r = est.report;
  nlohmann::json j;
  j["z"] = r.z;
  j["p"] = r.p;
  j["n"] = est.n;
  j["alpha_hat"] = {r.alpha_hat(0), r.alpha_hat(1)};
  j["tilt"] = {r.tilt.lambda1, r.tilt.lambda2};
  j["tilt_norm"] = r.tilt_norm;
  j["Sigma"] = {{r.sigma(0, 0), r.sigma(0, 1)}, {r.sigma(1, 0), r.sigma(1, 1)}};
  j["e"] = {r.e(0), r.e(1)};
  j["e_Sigma_e"] = r.e_sigma_e;
  j["Sigma_tilde11"] = r.sigma_tilde11;
  j["D11"] = r.d11;
  j["curvature"] = r.curvature;
  j["sigma_sq"] = r.sigma_sq;
  j["chi_star"] = r.chi_star;
  j["curvature_ok"] = r.curvature_ok;
  j["curvature_margin"] = r.curvature_check.margin;
  j["unique_ok"] = r.unique_ok;
  j["J_z"] = r.j_z;
  j["log_prefactor"] = est.log_prefactor;
  j["prefactor"] = est.prefactor;
  j["log_value"] = est.log_value;
  j["value"] = est.value;
  return j.dump(2);
}

}  // namespace selfnorm
