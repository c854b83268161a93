#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "selfnorm/distributions.hpp"
#include "selfnorm/extended.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm {

/// Minimizer of the rate function over the target set, which sits on its
/// curved boundary at abscissa y_hat (or at the origin).
struct BoundarySolution {
  double y_hat = 0.0;
  Eigen::Vector2d alpha_hat = Eigen::Vector2d::Zero();
  TiltVector tilt;
  double rate = 0.0;
  bool unique_flag = true;  // no competing local minimum within 1e-6
  bool at_origin = false;   // minimum at (0, 0), rate -ln P(X = 0)
};

/// sup_{c >= 0} inf_{t >= 0} ln E exp{t(cX - (z/p)(|X|^p + (p-1)c^{p/(p-1)}))}.
/// z > 1 gives ln P(X = 0) (-inf marker when there is no atom at 0).
/// Throws PreconditionError for z <= z*.
ExtendedReal j_supinf(const ScalarDistribution& dist, double p, double z);

/// sup_{y >= 0} inf_{lambda >= 0} ln E exp{lambda (xi_z(y) - h_z(y))} over the
/// supporting half-planes of the target set. Same conventions as j_supinf.
ExtendedReal j_halfplane(const ScalarDistribution& dist, double p, double z);

/// Minimizes Lambda along the boundary of the target set, z in (z*, 1).
/// Throws DegeneracyError for two-point laws (see rate_report).
/// Throws PreconditionError for z outside (z*, 1), NumericFailure when no
/// boundary point yields a finite rate.
BoundarySolution j_boundary(const ScalarDistribution& dist, const Normalizer& norm, double z);

/// j_boundary, with two-point laws solved on their support segment.
BoundarySolution dominating_point(const ScalarDistribution& dist, const Normalizer& norm, double z);

/// All routes that apply to the normalizer, with their largest disagreement.
struct RateReport {
  double z = 0.0;
  Normalizer norm = Normalizer::power_law(2.0);
  std::optional<ExtendedReal> j_supinf;
  std::optional<ExtendedReal> j_halfplane;
  std::optional<ExtendedReal> j_boundary;
  std::optional<BoundarySolution> dominating;
  double agreement = 0.0;
};

/// Two-point laws fall back to the exact segment route for J_boundary.
RateReport rate_report(const ScalarDistribution& dist, const Normalizer& norm, double z);

/// {"z", "p", "J_supinf", "J_halfplane", "J_boundary", "alpha_hat", "tilt", "agreement"};
/// infinities are written as the strings "inf" / "-inf", missing routes as null.
std::string to_json(const RateReport& report);

}  // namespace selfnorm
