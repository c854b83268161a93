#include "selfnorm/exact_twopoint.hpp"

#include <cmath>
#include <numbers>

#include "selfnorm/errors.hpp"
#include "selfnorm/geometry.hpp"

namespace selfnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_law(double a, double b, double q) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("two-point law needs a < b");
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("two-point success probability must lie in (0, 1)");
}

// Root of f(t) = z on [lo, hi], given f(lo) - z and f(hi) - z of opposite signs.
double bisect(const std::function<double(double)>& f, double lo, double hi, double z) {
  const bool rising = f(hi) > f(lo);
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) >= z) == rising) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

bool lattice_member(double a, double b, const Normalizer& norm, double z, long n, long k) {
  const double x1 = (static_cast<double>(k) * b + static_cast<double>(n - k) * a) / static_cast<double>(n);
  const double x2 = (static_cast<double>(k) * norm(b) + static_cast<double>(n - k) * norm(a)) / static_cast<double>(n);
  return in_target_set({x1, x2}, z, norm);
}

double log_binomial_pmf(long n, long k, double q) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(q) +
         (n - k) * std::log1p(-q);
}

double log_add(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

}  // namespace

std::string to_string(TwoPointCase c) {
  switch (c) {
    case TwoPointCase::a_neg: return "a_neg";
    case TwoPointCase::a_zero: return "a_zero";
    case TwoPointCase::a_pos: return "a_pos";
    case TwoPointCase::trivial_b_nonpos: return "trivial_b_nonpos";
  }
  return "unknown";
}

double two_point_ratio(double a, double b, const Normalizer& norm, double t) {
  const double num = a + t * (b - a);
  const double den = norm.inverse_positive(norm(a) + t * (norm(b) - norm(a)));
  if (den == 0.0) return kInf;  // T_n = 0
  return num / den;
}

ThresholdSolution thresholds(double a, double b, double q, const Normalizer& norm, double z) {
  check_law(a, b, q);
  ThresholdSolution s;
  s.q = q;
  if (b <= 0.0) {
    s.case_tag = TwoPointCase::trivial_b_nonpos;
    return s;
  }
  auto f = [&](double t) { return two_point_ratio(a, b, norm, t); };
  const double zs = f(q);
  if (!(z > zs)) throw PreconditionError("z must exceed z* = " + std::to_string(zs));
  if (!(z < 1.0)) throw PreconditionError("thresholds need z < 1");
  s.t_plus = bisect(f, q, 1.0, z);
  if (a < 0.0) {
    s.case_tag = TwoPointCase::a_neg;
  } else if (a == 0.0) {
    s.case_tag = TwoPointCase::a_zero;
    s.t_minus = 0.0;
  } else {
    s.case_tag = TwoPointCase::a_pos;
    s.t_minus = bisect(f, 0.0, q, z);
  }
  return s;
}

double binary_rate(double alpha, double q) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("binary_rate needs alpha in [0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("binary_rate needs q in (0, 1)");
  double r = 0.0;
  if (alpha > 0.0) r += alpha * std::log(alpha / q);
  if (alpha < 1.0) r += (1.0 - alpha) * std::log((1.0 - alpha) / (1.0 - q));
  return std::max(0.0, r);
}

ExtendedReal binary_tilt(double alpha, double q) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("binary_tilt needs alpha in [0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("binary_tilt needs q in (0, 1)");
  if (alpha == 0.0) return ExtendedReal::minus_infinity();
  if (alpha == 1.0) return ExtendedReal::plus_infinity();
  return ExtendedReal::finite(std::log(alpha / (1.0 - alpha) * (1.0 - q) / q));
}

double log_q_n(double alpha, double q, long n, Tail tail) {
  if (n < 1) throw PreconditionError("n must be positive");
  if (tail == Tail::lower) {
    if (!(alpha > 0.0 && alpha < q)) throw PreconditionError("lower-tail level must lie in (0, q)");
    return log_q_n(1.0 - alpha, 1.0 - q, n, Tail::upper);
  }
  if (!(alpha > q && alpha < 1.0)) throw PreconditionError("upper-tail level must lie in (q, 1)");
  const double nn = static_cast<double>(n);
  return 0.5 * std::log(alpha / (2.0 * std::numbers::pi * nn * (1.0 - alpha))) + std::log((1.0 - q) / (alpha - q)) +
         nn * alpha * std::log(q / alpha) + nn * (1.0 - alpha) * std::log((1.0 - q) / (1.0 - alpha));
}

double q_n(double alpha, double q, long n, Tail tail) { return std::exp(log_q_n(alpha, q, n, tail)); }

double log_exact_prob(double a, double b, double q, const Normalizer& norm, double z, long n) {
  check_law(a, b, q);
  if (n < 1) throw PreconditionError("n must be positive");
  // Log-sum-exp with the running maximum, then a compensated sum of the
  // rescaled terms.
  std::vector<double> logs;
  for (long k = 0; k <= n; ++k)
    if (lattice_member(a, b, norm, z, n, k)) logs.push_back(log_binomial_pmf(n, k, q));
  if (logs.empty()) return -kInf;
  double m = -kInf;
  for (double l : logs) m = std::max(m, l);
  double sum = 0.0, comp = 0.0;
  for (double l : logs) {
    const double term = std::exp(l - m);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return m + std::log(sum + comp);
}

double exact_prob(double a, double b, double q, const Normalizer& norm, double z, long n) {
  return std::exp(log_exact_prob(a, b, q, norm, z, n));
}

BinomialAsymptotics asymptotic_prob(double a, double b, double q, const Normalizer& norm, double z, long n,
                                    LatticeRule rule) {
  if (n < 1) throw PreconditionError("n must be positive");
  const ThresholdSolution th = thresholds(a, b, q, norm, z);
  BinomialAsymptotics out;
  out.n = n;
  out.case_tag = th.case_tag;
  out.log_exact = log_exact_prob(a, b, q, norm, z, n);
  out.exact = std::exp(out.log_exact);

  const double nn = static_cast<double>(n);
  auto near_integer = [](double x) {
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x));
  };
  auto upper_index = [&](double t) -> long {
    const double x = nn * t;
    if (near_integer(x)) {
      const long r = std::lround(x);
      return lattice_member(a, b, norm, z, n, r) ? r : r + 1;
    }
    return static_cast<long>(std::ceil(x));
  };
  auto lower_index = [&](double t) -> long {
    const double x = nn * t;
    if (near_integer(x)) {
      const long r = std::lround(x);
      return lattice_member(a, b, norm, z, n, r) ? r : r - 1;
    }
    return static_cast<long>(std::floor(x));
  };
  auto upper_term = [&](long k) {
    if (k > n) return -kInf;
    if (k == n) return nn * std::log(q);  // P(N_n = n)
    return log_q_n(static_cast<double>(k) / nn, q, n, Tail::upper);
  };
  auto lower_term = [&](long k) {
    if (k < 0) return -kInf;
    if (k == 0) return nn * std::log1p(-q);  // P(N_n = 0)
    return log_q_n(static_cast<double>(k) / nn, q, n, Tail::lower);
  };

  switch (th.case_tag) {
    case TwoPointCase::trivial_b_nonpos:
      out.log_upper = -kInf;
      out.log_total = out.log_exact;
      break;
    case TwoPointCase::a_neg:
    case TwoPointCase::a_zero:
    case TwoPointCase::a_pos: {
      if (rule == LatticeRule::literal_ceiling) {
        out.alpha_upper = std::ceil(th.t_plus);
        out.log_upper = kInf;  // sqrt(alpha / (1 - alpha)) at alpha = 1
      } else {
        const long k = upper_index(th.t_plus);
        out.alpha_upper = static_cast<double>(k) / nn;
        out.log_upper = upper_term(k);
      }
      if (th.case_tag == TwoPointCase::a_zero) {
        out.log_lower = nn * std::log1p(-q);  // {N_n = 0} = {T_n = 0}
      } else if (th.case_tag == TwoPointCase::a_pos) {
        const long k = rule == LatticeRule::literal_ceiling ? static_cast<long>(std::floor(th.t_minus))
                                                           : lower_index(th.t_minus);
        out.alpha_lower = static_cast<double>(k) / nn;
        out.log_lower = lower_term(k);
      }
      out.log_total = out.log_upper == kInf ? kInf : log_add(out.log_upper, out.log_lower);
      break;
    }
  }
  out.total = std::exp(out.log_total);
  if (out.log_total == out.log_exact) out.ratio = 1.0;
  else out.ratio = std::exp(out.log_total - out.log_exact);
  return out;
}

}  // namespace selfnorm
