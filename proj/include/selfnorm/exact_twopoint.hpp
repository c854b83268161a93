#pragma once

#include <limits>
#include <string>
#include <vector>

#include "selfnorm/extended.hpp"
#include "selfnorm/normalizer.hpp"

namespace selfnorm {

/// Sign of the lower atom a, which fixes the shape of the event {W_n >= z}.
enum class TwoPointCase { a_neg, a_zero, a_pos, trivial_b_nonpos };

std::string to_string(TwoPointCase c);

/// Roots of f(t) = z, f(t) = (a + t(b - a)) / u_+^{-1}(u(a) + t(u(b) - u(a))).
/// a < 0: one root t_z, event {N_n >= t_z n}.
/// a >= 0: t_minus < q < t_plus, event {N_n <= t_minus n} u {N_n >= t_plus n}
/// (t_minus = 0 when a = 0, where {N_n = 0} means T_n = 0).
struct ThresholdSolution {
  TwoPointCase case_tag = TwoPointCase::a_neg;
  double t_minus = 0.0;  // unused for a_neg
  double t_plus = 0.0;   // t_z for a_neg
  double q = 0.0;
};

/// Ratio S_n / (n u_+^{-1}(T_n / n)) as a function of the success fraction t = N_n / n.
double two_point_ratio(double a, double b, const Normalizer& norm, double t);

/// Throws PreconditionError unless a < b, q in (0,1) and f(q) < z < 1.
/// For b <= 0 returns the trivial tag without roots.
ThresholdSolution thresholds(double a, double b, double q, const Normalizer& norm, double z);
inline ThresholdSolution thresholds(double a, double b, double q, double p, double z) {
  return thresholds(a, b, q, Normalizer::power_law(p), z);
}

/// alpha ln(alpha/q) + (1-alpha) ln((1-alpha)/(1-q)) on [0, 1].
double binary_rate(double alpha, double q);
/// ln(alpha/(1-alpha) (1-q)/q); +-inf markers at the endpoints.
ExtendedReal binary_tilt(double alpha, double q);

enum class Tail { upper, lower };

/// Log of the sharp binomial tail approximation. Upper: P(N_n >= alpha n) for
/// alpha in (q, 1). Lower: P(N_n <= alpha n) for alpha in (0, q), via the
/// upper form applied to n - N_n.
double log_q_n(double alpha, double q, long n, Tail tail = Tail::upper);
double q_n(double alpha, double q, long n, Tail tail = Tail::upper);

/// Exact P(W_n >= z) by summing binomial(n, q) terms over the k whose lattice
/// point (S_n, T_n)/n lies in the closed target set.
double exact_prob(double a, double b, double q, const Normalizer& norm, double z, long n);
inline double exact_prob(double a, double b, double q, double p, double z, long n) {
  return exact_prob(a, b, q, Normalizer::power_law(p), z, n);
}
/// Natural log of exact_prob; stays finite where the probability underflows.
double log_exact_prob(double a, double b, double q, const Normalizer& norm, double z, long n);

/// How the real thresholds become lattice levels.
enum class LatticeRule {
  per_n,           // ceil(n t)/n for upper branches, floor(n t)/n for the lower one
  literal_ceiling  // ceil(t) itself; equals 1 and makes the upper term diverge
};

struct BinomialAsymptotics {
  long n = 0;
  TwoPointCase case_tag = TwoPointCase::a_neg;
  double alpha_upper = 0.0;
  double alpha_lower = 0.0;     // a_pos only
  double log_upper = 0.0;       // log of the upper-branch term
  double log_lower = -std::numeric_limits<double>::infinity();  // lower branch or {T_n = 0} term
  double log_total = 0.0;
  double log_exact = 0.0;
  double total = 0.0;
  double exact = 0.0;
  double ratio = 0.0;           // exp(log_total - log_exact)
};

BinomialAsymptotics asymptotic_prob(double a, double b, double q, const Normalizer& norm, double z, long n,
                                    LatticeRule rule = LatticeRule::per_n);
inline BinomialAsymptotics asymptotic_prob(double a, double b, double q, double p, double z, long n,
                                           LatticeRule rule = LatticeRule::per_n) {
  return asymptotic_prob(a, b, q, Normalizer::power_law(p), z, n, rule);
}

}  // namespace selfnorm
