#pragma once

#include <Eigen/Core>
#include <string>

#include "selfnorm/distributions.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm {

/// Hess A at the tilt of alpha_hat, i.e. the covariance of the Cramer transform.
/// Throws DegeneracyError when det < 1e-12 tr^2, PreconditionError when the
/// tilt of alpha_hat does not converge.
Eigen::Matrix2d tilted_covariance(const ScalarDistribution& dist, const Normalizer& norm,
                                  const Eigen::Vector2d& alpha_hat);
/// Same at a known interior tilt.
Eigen::Matrix2d tilted_covariance_at(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

/// Tangential variance ebar Sigma ebar^T - (ebar Sigma e^T)^2 / (e Sigma e^T),
/// ebar the unit vector orthogonal to e_unit.
double projected_variance(const Eigen::Matrix2d& sigma, const Eigen::Vector2d& e_unit);

struct CurvatureCheck {
  bool holds = false;
  bool inconclusive = false;  // d Lambda / d alpha2 vanished
  double lhs = 0.0;           // g2'' of the level line of Lambda through alpha_hat
  double rhs = 0.0;           // g1'' = p(p-1) z^-p alpha1^(p-2) of the boundary
  double margin = 0.0;        // lhs - rhs
};

/// First-order-only contact of the level line and the boundary at alpha_hat.
/// Power-law normalizers only.
CurvatureCheck curvature_condition(const ScalarDistribution& dist, const Normalizer& norm, double z,
                                   const Eigen::Vector2d& alpha_hat);

struct SigmaSq {
  double tilt_norm = 0.0;
  double d11 = 0.0;         // p(p-1) z^-p alpha1^(p-2)
  double curvature = 0.0;   // d11 / |grad V|^3
  double projected = 0.0;   // projected_variance at the unit normal
  double sigma_sq = 0.0;
  double chi_star = 1.0;    // 1 / sqrt(1 - sigma_sq)
};

/// sigma^2 = |lambda| * curvature * projected; RegimeError when >= 1.
SigmaSq sigma_sq(const ScalarDistribution& dist, const Normalizer& norm, double z, const Eigen::Vector2d& alpha_hat);

/// 1 / sqrt(1 - s); RegimeError for s >= 1 or s < 0.
double chi_star(double s);

/// Everything the exact asymptotic display needs, at one z.
struct PrefactorReport {
  double z = 0.0;
  double p = 0.0;
  Eigen::Vector2d alpha_hat = Eigen::Vector2d::Zero();
  TiltVector tilt;
  double tilt_norm = 0.0;
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  Eigen::Vector2d e = Eigen::Vector2d::Zero();  // unit normal of the boundary
  double e_sigma_e = 0.0;
  double sigma_tilde11 = 0.0;  // tangential variance
  double d11 = 0.0;
  double curvature = 0.0;
  double sigma_sq = 0.0;
  double chi_star = 1.0;
  CurvatureCheck curvature_check;
  bool curvature_ok = false;
  bool unique_ok = false;
  double j_z = 0.0;
};

/// Exact asymptotics at a given n, in log space.
struct AsymptoticEstimate {
  long n = 0;
  PrefactorReport report;
  double log_prefactor = 0.0;  // -ln(sqrt(2 pi n (1 - sigma^2) e Sigma e^T) |lambda|)
  double log_value = 0.0;      // n J_z + log_prefactor
  double prefactor = 0.0;
  double value = 0.0;
};

/// Dominating point, covariances and regime flags at z. Throws DegeneracyError
/// for two-point laws, RegimeError when the dominating point is the origin or
/// a flag fails.
PrefactorReport prefactor_report(const ScalarDistribution& dist, const Normalizer& norm, double z);

AsymptoticEstimate asymptotic_estimate(const PrefactorReport& report, long n);
AsymptoticEstimate asymptotic_estimate(const ScalarDistribution& dist, const Normalizer& norm, double z, long n);

/// Audit record with every intermediate quantity.
std::string to_json(const AsymptoticEstimate& est);

}  // namespace selfnorm
