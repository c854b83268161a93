#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "selfnorm/distributions.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm {

enum class McMethod { direct, importance };
std::string to_string(McMethod m);

struct McEstimate {
  McMethod method = McMethod::direct;
  long n = 0;
  long trials = 0;
  long hits = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double log_value = 0.0;  // ln value, usable when value underflows; -inf without hits
  double std_error = 0.0;
  double rel_error = 0.0;  // std_error / value
  double ess = 0.0;        // (sum w)^2 / sum w^2 over hits; trials for direct
  TiltVector tilt;
};

struct McOptions {
  long trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Event on the end point (S_n, T_n) of an n-step path.
using PathEvent = std::function<bool(double s, double t)>;

/// Weighted estimate of P(event) from n-step paths drawn at tilt lam, weight
/// exp(-lam . Z_n + n A(lam)). Path i uses RngStream(seed, i); paths are
/// grouped in fixed chunks merged in index order. Thread count does not
/// change the result.
McEstimate tilted_path_mc(const ScalarDistribution& dist, const Normalizer& norm, long n, TiltVector lam,
                          const PathEvent& event, const McOptions& opts);

/// Plain simulation of {Z_n / n in B_z}; binomial standard error.
McEstimate direct_mc(const ScalarDistribution& dist, const Normalizer& norm, double z, long n,
                     const McOptions& opts);

/// Importance sampling at the tilt of the dominating point. PreconditionError
/// for z outside (z*, 1) or when the dominating point is the origin.
McEstimate importance_mc(const ScalarDistribution& dist, const Normalizer& norm, double z, long n,
                         const McOptions& opts);

struct TrendPoint {
  long n = 0;
  double log_rate = 0.0;  // (1/n) ln estimate
  McEstimate estimate;
};

std::vector<TrendPoint> rate_trend(const ScalarDistribution& dist, const Normalizer& norm, double z,
                                   const std::vector<long>& n_schedule, const McOptions& opts);

/// "method,n,trials,seed,estimate,std_error,ess"
std::string mc_csv_header();
std::string mc_csv_row(const McEstimate& e);

}  // namespace selfnorm
