#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "selfnorm/distributions.hpp"
#include "selfnorm/extended.hpp"

namespace selfnorm {

/// Lambda(alpha) = sup_lambda (alpha . lambda - A(lambda)) together with the
/// maximizing tilt.
struct RatePoint {
  Eigen::Vector2d alpha = Eigen::Vector2d::Zero();
  ExtendedReal rate;     // +inf marker when not converged
  TiltVector tilt;       // last iterate
  bool converged = false;
  double residual = 0.0;     // |grad A(tilt) - alpha|
  double lower_bound = 0.0;  // best objective value seen along the Newton path
  int iterations = 0;
};

struct NewtonOptions {
  TiltVector start{0.0, -1.0};
  double tolerance = 1e-9;
  int max_iterations = 200;
  int max_halvings = 60;
  double divergence_norm = 1e6;  // |lambda| beyond which alpha is deemed outside A'
};

/// Solves grad A(lambda) = alpha by damped Newton. Step halving keeps iterates
/// inside the cumulant domain and the objective non-decreasing.
/// Throws DegeneracyError for two-point laws (Hessian singular everywhere).
RatePoint rate_at(const ScalarDistribution& dist, const Normalizer& norm, const Eigen::Vector2d& alpha,
                  const NewtonOptions& opts = {});

/// A univariate law described through its log-mgf.
struct UnivariateLaw {
  std::function<ExtendedReal(double)> log_mgf;
  ExtendedReal mean;
};

struct UnivariateRate {
  ExtendedReal rate;
  double lambda = 0.0;   // minimizer of ln E e^{lambda (xi - a)} over lambda >= 0
  bool boundary = false; // infimum approached only as lambda -> inf
};

/// -inf_{lambda >= 0} ln E exp(lambda (xi - a)), which is the Cramer rate of
/// xi at a when E xi < a. Golden-section search after a doubling bracket.
UnivariateRate univariate_rate(const UnivariateLaw& xi, double a);

struct Interval {
  double lo;
  double hi;
};

struct GridSpec {
  Interval x1;
  Interval x2;
  int n1 = 2;
  int n2 = 2;
};

enum class EvalOrder { row_major, column_major };

/// Rate function sampled on a rectangular grid; cells are stored row-major
/// with x1 varying fastest.
struct ContourGrid {
  GridSpec spec;
  std::vector<double> x1s;
  std::vector<double> x2s;
  std::vector<RatePoint> cells;

  const RatePoint& at(int i1, int i2) const { return cells[static_cast<std::size_t>(i2) * spec.n1 + i1]; }
};

/// Evaluates rate_at on the grid, warm-starting each cell from its left
/// neighbour (then the one below). With threads > 1 the rows are split into
/// contiguous blocks; the first row of a block starts cold.
ContourGrid contour(const ScalarDistribution& dist, const Normalizer& norm, const GridSpec& spec,
                    EvalOrder order = EvalOrder::row_major, unsigned threads = 1);

/// "x1,x2,rate" with unconverged or infinite cells spelled "inf".
std::string contour_csv(const ContourGrid& grid);

}  // namespace selfnorm
