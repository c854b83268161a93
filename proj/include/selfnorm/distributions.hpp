#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "selfnorm/extended.hpp"
#include "selfnorm/normalizer.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

struct Atom {
  double value;
  double prob;
};

/// P(X = a) = 1 - q, P(X = b) = q, with a < b.
struct TwoPoint {
  double a;
  double b;
  double q;
};

struct FiniteDiscrete {
  std::vector<Atom> atoms;
};

struct Gaussian {
  double mu;
  double sigma;
};

/// X = shift + Y where P(Y > y) = (scale / y)^tail_index for y >= scale.
struct ShiftedPareto {
  double scale;
  double tail_index;
  double shift;
};

/// Law of the jump X. Immutable and cheap to copy.
class ScalarDistribution {
 public:
  using Variant = std::variant<TwoPoint, FiniteDiscrete, Gaussian, ShiftedPareto>;

  static ScalarDistribution two_point(double a, double b, double q);
  static ScalarDistribution finite(std::vector<Atom> atoms);
  static ScalarDistribution gaussian(double mu, double sigma);
  static ScalarDistribution pareto(double scale, double tail_index, double shift = 0.0);

  const Variant& variant() const { return law_; }
  bool is_discrete() const;

  /// Atoms with positive mass (discrete laws only).
  std::vector<Atom> atoms() const;

  double prob_zero() const;
  double prob_positive() const;

  /// E X; +inf when the positive tail is not integrable.
  ExtendedReal mean() const;

  /// Smallest t with P(|X| <= t) >= level.
  double abs_quantile(double level) const;

  std::string describe() const;

 private:
  explicit ScalarDistribution(Variant v) : law_(std::move(v)) {}
  Variant law_;
};

/// Tilt lambda = (lambda1, lambda2) acting on the bivariate jump (X, u(X)).
struct TiltVector {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  Eigen::Vector2d vec() const { return {lambda1, lambda2}; }
  static TiltVector from(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
};

/// Log-mgf A(lambda), the tilted mean grad A and tilted covariance Hess A.
struct TiltedMoments {
  double log_mgf = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

/// A(lambda) = ln E exp(lambda1 X + lambda2 u(X)); +inf marker when divergent.
/// Throws NumericFailure if quadrature misses its tolerance.
ExtendedReal cumulant(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

/// True when lambda lies in the interior of the cumulant domain.
bool in_cumulant_interior(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

/// All of A, grad A and Hess A in one pass. DomainError outside the interior.
TiltedMoments tilted_moments(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

Eigen::Vector2d cumulant_grad(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);
Eigen::Matrix2d cumulant_hess(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

/// True when (X, u(X)) is supported on a straight line, i.e. the two-point case.
bool is_degenerate(const ScalarDistribution& dist, const Normalizer& norm);

/// E u(X), +inf when not integrable.
ExtendedReal expected_normalizer(const ScalarDistribution& dist, const Normalizer& norm);

/// max(0, E X / u_+^{-1}(E u(X))), or 0 when E u(X) = inf or E X <= 0.
double z_star(const ScalarDistribution& dist, const Normalizer& norm);

/// (int_0^x t dF)^p / int_0^x t^p dF for the law of |X|; nullopt when there is
/// no mass in (0, x_cut].
std::optional<double> truncated_moment_ratio(const ScalarDistribution& dist, double x_cut, double p);

/// Sampler for the Cramer transform of X at a fixed tilt. Prepared once, then
/// draws are cheap; thread-safe given one RngStream per thread.
class TiltedSampler {
 public:
  TiltedSampler(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam);

  double operator()(RngStream& rng) const;

  double log_mgf() const { return log_mgf_; }

 private:
  enum class Method { table, gaussian, gaussian_rejection, pareto_rejection };

  ScalarDistribution dist_;
  Normalizer norm_;
  TiltVector lam_;
  Method method_;
  double log_mgf_ = 0.0;
  std::vector<double> values_;
  std::vector<double> cumulative_;
  double loc_ = 0.0;
  double sd_ = 1.0;
  double envelope_ = 0.0;
};

/// One draw of the tilted X. Prefer TiltedSampler for repeated draws.
double tilted_sample(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam, RngStream& rng);

}  // namespace selfnorm
