#include "selfnorm/distributions.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "quadrature.hpp"
#include "selfnorm/errors.hpp"

namespace selfnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// lambda * v with 0 * inf treated as 0.
inline double tilt_term(double lambda, double v) { return lambda == 0.0 ? 0.0 : lambda * v; }

bool is_quadratic(const Normalizer& norm) { return norm.is_power_law() && norm.p() == 2.0; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// ---------------------------------------------------------------- discrete

TiltedMoments discrete_moments(const std::vector<Atom>& atoms, const Normalizer& norm, TiltVector lam) {
  std::vector<double> logw(atoms.size());
  std::vector<Eigen::Vector2d> zs(atoms.size());
  double top = -kInf;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    zs[i] = {atoms[i].value, norm(atoms[i].value)};
    logw[i] = std::log(atoms[i].prob) + tilt_term(lam.lambda1, zs[i](0)) + tilt_term(lam.lambda2, zs[i](1));
    top = std::max(top, logw[i]);
  }
  double total = 0.0;
  for (double& lw : logw) total += (lw = std::exp(lw - top));
  TiltedMoments m;
  m.log_mgf = top + std::log(total);
  for (std::size_t i = 0; i < atoms.size(); ++i) m.mean += (logw[i] / total) * zs[i];
  double c00 = 0.0, c01 = 0.0, c11 = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Eigen::Vector2d d = zs[i] - m.mean;
    const double w = logw[i] / total;
    c00 += w * d(0) * d(0);
    c01 += w * d(0) * d(1);
    c11 += w * d(1) * d(1);
  }
  m.cov << c00, c01, c01, c11;
  return m;
}

// ------------------------------------------------- Gaussian, u(x) = x^2

std::optional<TiltedMoments> quadratic_gaussian_moments(const Gaussian& g, TiltVector lam) {
  const double s2 = g.sigma * g.sigma;
  const double k = 1.0 - 2.0 * lam.lambda2 * s2;
  if (!(k > 0.0)) return std::nullopt;
  TiltedMoments m;
  const double shifted = lam.lambda1 * s2 + g.mu;
  m.log_mgf = -0.5 * std::log(k) + shifted * shifted / (2.0 * s2 * k) - g.mu * g.mu / (2.0 * s2);
  const double mean = shifted / k;
  const double var = s2 / k;
  m.mean = {mean, mean * mean + var};
  m.cov << var, 2.0 * mean * var, 2.0 * mean * var, 4.0 * mean * mean * var + 2.0 * var * var;
  return m;
}

// ---------------------------------------------------- continuous charts

// Continuous laws are integrated in a chart variable t with x = x_of(t) and
// log density log_density(t) of t.
struct ContinuousChart {
  detail::Chart chart;
  std::function<double(double)> x_of;
  std::function<double(double)> log_density;
};

// Maximizer of lambda1 x + lambda2 u(x) for a power law with lambda2 < 0.
std::optional<double> tilt_peak(const Normalizer& norm, TiltVector lam) {
  if (!norm.is_power_law() || !(lam.lambda2 < 0.0) || lam.lambda1 == 0.0) return std::nullopt;
  const double p = norm.p();
  const double mag = std::pow(std::abs(lam.lambda1) / (p * -lam.lambda2), 1.0 / (p - 1.0));
  return std::copysign(mag, lam.lambda1);
}

ContinuousChart make_chart(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  const std::optional<double> peak = tilt_peak(norm, lam);
  return std::visit(
      overloaded{
          [&](const Gaussian& g) {
            ContinuousChart c;
            const double log_norm = std::log(g.sigma * std::sqrt(2.0 * std::numbers::pi));
            c.x_of = [](double t) { return t; };
            c.log_density = [g, log_norm](double t) {
              const double d = (t - g.mu) / g.sigma;
              return -0.5 * d * d - log_norm;
            };
            c.chart = {-kInf, kInf, false, g.mu, g.sigma, norm.breakpoints(),
                       {0.0, g.mu + lam.lambda1 * g.sigma * g.sigma}};
            if (peak) c.chart.hints.push_back(*peak);
            return c;
          },
          [&](const ShiftedPareto& pa) {
            ContinuousChart c;
            c.x_of = [pa](double s) { return pa.shift + pa.scale * std::exp(s); };
            c.log_density = [pa](double s) { return std::log(pa.tail_index) - pa.tail_index * s; };
            std::vector<double> breaks;
            for (double b : norm.breakpoints())
              if (b > pa.shift + pa.scale) breaks.push_back(std::log((b - pa.shift) / pa.scale));
            // x stays finite up to s = ln(1e300 / scale).
            c.chart = {0.0, std::log(1e300 / pa.scale), true, 1.0 / pa.tail_index, 1.0, breaks, {0.0}};
            if (peak && *peak > pa.shift + pa.scale) c.chart.hints.push_back(std::log((*peak - pa.shift) / pa.scale));
            return c;
          },
          [](const auto&) -> ContinuousChart { throw PreconditionError("not a continuous law"); },
      },
      dist.variant());
}

// Generic quadrature path; nullopt when the integral diverges.
std::optional<TiltedMoments> quadrature_moments(const ScalarDistribution& dist, const Normalizer& norm,
                                                TiltVector lam, bool with_cov) {
  const ContinuousChart c = make_chart(dist, norm, lam);
  auto g = [&](double t) {
    const double x = c.x_of(t);
    return c.log_density(t) + tilt_term(lam.lambda1, x) + tilt_term(lam.lambda2, norm(x));
  };
  const detail::Window w = detail::find_window(g, c.chart);
  if (w.divergent) return std::nullopt;
  auto weight = [&](double t) { return std::exp(g(t) - w.log_peak); };
  std::vector<double> br = c.chart.breaks;
  for (double k = -4; k <= 4; ++k) br.push_back(w.peak + k * w.width);
  // Round-off floor of g near the peak.
  const double xp = c.x_of(w.peak);
  const double g_scale = std::abs(c.log_density(w.peak)) + std::abs(tilt_term(lam.lambda1, xp)) +
                         std::abs(tilt_term(lam.lambda2, norm(xp)));
  const double rel = std::max(1e-13, 64 * std::numeric_limits<double>::epsilon() * g_scale);
  const double i0 = detail::integrate(weight, w.lo, w.hi, br, rel, 10 * rel);
  TiltedMoments m;
  m.log_mgf = w.log_peak + std::log(i0);
  if (!with_cov) return m;
  const double mx = detail::integrate([&](double t) { return c.x_of(t) * weight(t); }, w.lo, w.hi, br, rel,
                                      10 * rel * i0) / i0;
  const double mu = detail::integrate([&](double t) { return norm(c.x_of(t)) * weight(t); }, w.lo, w.hi, br,
                                      rel, 10 * rel * i0) / i0;
  m.mean = {mx, mu};
  auto central = [&](int i, int j) {
    return detail::integrate(
               [&](double t) {
                 const double x = c.x_of(t);
                 const double d[2] = {x - mx, norm(x) - mu};
                 return d[i] * d[j] * weight(t);
               },
               w.lo, w.hi, br, rel, 10 * rel * i0) / i0;
  };
  const double c01 = central(0, 1);
  m.cov << central(0, 0), c01, c01, central(1, 1);
  return m;
}

// Analytic divergence rules; nullopt means "decide numerically".
std::optional<bool> known_finite(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  return std::visit(overloaded{
                        [&](const Gaussian& g) -> std::optional<bool> {
                          if (lam.lambda2 <= 0.0) return true;
                          if (!norm.is_power_law()) return std::nullopt;
                          const double p = norm.p();
                          if (p < 2.0) return true;
                          if (p > 2.0) return false;
                          return lam.lambda2 < 1.0 / (2.0 * g.sigma * g.sigma);
                        },
                        [&](const ShiftedPareto&) -> std::optional<bool> {
                          if (lam.lambda2 < 0.0) return true;
                          if (lam.lambda2 > 0.0) return false;
                          return lam.lambda1 <= 0.0;
                        },
                        [](const auto&) -> std::optional<bool> { return true; },
                    },
                    dist.variant());
}

// Moments wherever the integrals converge (interior or not); nullopt = +inf.
std::optional<TiltedMoments> moments_if_finite(const ScalarDistribution& dist, const Normalizer& norm,
                                               TiltVector lam, bool with_cov) {
  if (dist.is_discrete()) return discrete_moments(dist.atoms(), norm, lam);
  if (const auto finite = known_finite(dist, norm, lam); finite && !*finite) return std::nullopt;
  if (const auto* g = std::get_if<Gaussian>(&dist.variant()); g && is_quadratic(norm))
    return quadratic_gaussian_moments(*g, lam);
  return quadrature_moments(dist, norm, lam, with_cov);
}

}  // namespace

// ------------------------------------------------------- distribution

ScalarDistribution ScalarDistribution::two_point(double a, double b, double q) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("two-point law needs a < b");
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("two-point law needs q in (0, 1)");
  return ScalarDistribution(TwoPoint{a, b, q});
}

ScalarDistribution ScalarDistribution::finite(std::vector<Atom> atoms) {
  if (atoms.empty()) throw PreconditionError("finite law needs at least one atom");
  double total = 0.0;
  for (const Atom& at : atoms) {
    if (!(at.prob >= 0.0) || !std::isfinite(at.value)) throw PreconditionError("finite law: bad atom");
    total += at.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("finite law: probabilities must sum to 1");
  std::erase_if(atoms, [](const Atom& at) { return at.prob == 0.0; });
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.value < r.value; });
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (atoms[i].value == atoms[i - 1].value) throw PreconditionError("finite law: duplicate atom");
  return ScalarDistribution(FiniteDiscrete{std::move(atoms)});
}

ScalarDistribution ScalarDistribution::gaussian(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw PreconditionError("Gaussian law needs sigma > 0");
  return ScalarDistribution(Gaussian{mu, sigma});
}

ScalarDistribution ScalarDistribution::pareto(double scale, double tail_index, double shift) {
  if (!(scale > 0.0) || !(tail_index > 0.0) || !std::isfinite(shift) || !std::isfinite(scale))
    throw PreconditionError("Pareto law needs scale > 0 and tail_index > 0");
  return ScalarDistribution(ShiftedPareto{scale, tail_index, shift});
}

bool ScalarDistribution::is_discrete() const {
  return std::holds_alternative<TwoPoint>(law_) || std::holds_alternative<FiniteDiscrete>(law_);
}

std::vector<Atom> ScalarDistribution::atoms() const {
  if (const auto* t = std::get_if<TwoPoint>(&law_)) return {{t->a, 1.0 - t->q}, {t->b, t->q}};
  if (const auto* f = std::get_if<FiniteDiscrete>(&law_)) return f->atoms;
  throw PreconditionError("atoms() on a continuous law");
}

double ScalarDistribution::prob_zero() const {
  if (!is_discrete()) return 0.0;
  for (const Atom& at : atoms())
    if (at.value == 0.0) return at.prob;
  return 0.0;
}

double ScalarDistribution::prob_positive() const {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return normal_cdf(g.mu / g.sigma); },
                        [](const ShiftedPareto& pa) {
                          if (pa.shift + pa.scale >= 0.0) return 1.0;
                          return std::pow(pa.scale / (-pa.shift), pa.tail_index);
                        },
                        [this](const auto&) {
                          double s = 0.0;
                          for (const Atom& at : atoms())
                            if (at.value > 0.0) s += at.prob;
                          return s;
                        },
                    },
                    law_);
}

ExtendedReal ScalarDistribution::mean() const {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return ExtendedReal::finite(g.mu); },
                        [](const ShiftedPareto& pa) {
                          if (pa.tail_index <= 1.0) return ExtendedReal::plus_infinity();
                          return ExtendedReal::finite(pa.shift +
                                                      pa.scale * pa.tail_index / (pa.tail_index - 1.0));
                        },
                        [this](const auto&) {
                          double s = 0.0;
                          for (const Atom& at : atoms()) s += at.prob * at.value;
                          return ExtendedReal::finite(s);
                        },
                    },
                    law_);
}

double ScalarDistribution::abs_quantile(double level) const {
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("quantile level must lie in (0, 1)");
  if (is_discrete()) {
    auto as = atoms();
    std::sort(as.begin(), as.end(),
              [](const Atom& l, const Atom& r) { return std::abs(l.value) < std::abs(r.value); });
    double cum = 0.0;
    for (const Atom& at : as)
      if ((cum += at.prob) >= level - 1e-15) return std::abs(at.value);
    return std::abs(as.back().value);
  }
  std::function<double(double)> cdf_abs;
  double hi = 1.0;
  if (const auto* g = std::get_if<Gaussian>(&law_)) {
    cdf_abs = [g](double t) { return normal_cdf((t - g->mu) / g->sigma) - normal_cdf((-t - g->mu) / g->sigma); };
    hi = std::abs(g->mu) + g->sigma;
  } else {
    const auto pa = std::get<ShiftedPareto>(law_);
    auto cdf_y = [pa](double y) { return y <= pa.scale ? 0.0 : 1.0 - std::pow(pa.scale / y, pa.tail_index); };
    cdf_abs = [pa, cdf_y](double t) { return cdf_y(t - pa.shift) - cdf_y(-t - pa.shift); };
    hi = std::abs(pa.shift) + pa.scale;
  }
  while (cdf_abs(hi) < level) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf_abs(mid) < level ? lo : hi) = mid;
  }
  return hi;
}

std::string ScalarDistribution::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const TwoPoint& t) { os << "TwoPoint(" << t.a << ", " << t.b << ", " << t.q << ")"; },
                 [&](const FiniteDiscrete& f) {
                   os << "FiniteDiscrete{";
                   for (std::size_t i = 0; i < f.atoms.size(); ++i)
                     os << (i ? ", " : "") << "(" << f.atoms[i].value << ", " << f.atoms[i].prob << ")";
                   os << "}";
                 },
                 [&](const Gaussian& g) { os << "Gaussian(" << g.mu << ", " << g.sigma << ")"; },
                 [&](const ShiftedPareto& pa) {
                   os << "ShiftedPareto(" << pa.scale << ", " << pa.tail_index << ", " << pa.shift << ")";
                 },
             },
             law_);
  return os.str();
}

// ------------------------------------------------------------- cumulant

ExtendedReal cumulant(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  if (lam.lambda1 == 0.0 && lam.lambda2 == 0.0) return ExtendedReal::finite(0.0);
  const auto m = moments_if_finite(dist, norm, lam, false);
  return m ? ExtendedReal::finite(m->log_mgf) : ExtendedReal::plus_infinity();
}

bool in_cumulant_interior(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  if (!std::isfinite(lam.lambda1) || !std::isfinite(lam.lambda2)) return false;
  return std::visit(overloaded{
                        [&](const Gaussian& g) {
                          if (lam.lambda2 < 0.0) return true;
                          if (norm.is_power_law()) {
                            const double p = norm.p();
                            if (p < 2.0) return true;
                            if (p > 2.0) return false;
                            return lam.lambda2 < 1.0 / (2.0 * g.sigma * g.sigma);
                          }
                          const TiltVector probe{lam.lambda1, lam.lambda2 + 1e-6 * std::max(1.0, std::abs(lam.lambda2))};
                          return cumulant(dist, norm, probe).is_finite();
                        },
                        [&](const ShiftedPareto&) { return lam.lambda2 < 0.0; },
                        [](const auto&) { return true; },
                    },
                    dist.variant());
}

TiltedMoments tilted_moments(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  if (!in_cumulant_interior(dist, norm, lam))
    throw DomainError("tilt (" + std::to_string(lam.lambda1) + ", " + std::to_string(lam.lambda2) +
                      ") is not interior to the cumulant domain");
  const auto m = moments_if_finite(dist, norm, lam, true);
  if (!m) throw DomainError("cumulant diverges at the requested tilt");
  return *m;
}

Eigen::Vector2d cumulant_grad(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  return tilted_moments(dist, norm, lam).mean;
}

Eigen::Matrix2d cumulant_hess(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam) {
  return tilted_moments(dist, norm, lam).cov;
}

bool is_degenerate(const ScalarDistribution& dist, const Normalizer& norm) {
  if (!dist.is_discrete()) return false;
  const auto as = dist.atoms();
  if (as.size() <= 2) return true;
  const Eigen::Vector2d z0{as[0].value, norm(as[0].value)};
  const Eigen::Vector2d z1{as[1].value, norm(as[1].value)};
  const Eigen::Vector2d dir = (z1 - z0).normalized();
  for (std::size_t i = 2; i < as.size(); ++i) {
    const Eigen::Vector2d d = Eigen::Vector2d{as[i].value, norm(as[i].value)} - z0;
    if (std::abs(dir(0) * d(1) - dir(1) * d(0)) > 1e-12 * std::max(1.0, d.norm())) return false;
  }
  return true;
}

ExtendedReal expected_normalizer(const ScalarDistribution& dist, const Normalizer& norm) {
  if (dist.is_discrete()) {
    double s = 0.0;
    for (const Atom& at : dist.atoms()) s += at.prob * norm(at.value);
    return ExtendedReal::finite(s);
  }
  if (const auto* g = std::get_if<Gaussian>(&dist.variant()); g && is_quadratic(norm))
    return ExtendedReal::finite(g->mu * g->mu + g->sigma * g->sigma);
  if (const auto* pa = std::get_if<ShiftedPareto>(&dist.variant())) {
    if (pa->tail_index <= 1.0) return ExtendedReal::plus_infinity();
    if (norm.is_power_law() && pa->tail_index <= norm.p()) return ExtendedReal::plus_infinity();
  }
  // ln of (u(x) x density), integrated in log space.
  const ContinuousChart c = make_chart(dist, norm, {});
  auto log_u = [&](double x) {
    if (norm.is_power_law()) return x == 0.0 ? -kInf : norm.p() * std::log(std::abs(x));
    const double v = norm(x);
    return v > 0.0 ? std::log(v) : -kInf;
  };
  auto g = [&](double t) { return c.log_density(t) + log_u(c.x_of(t)); };
  const detail::Window w = detail::find_window(g, c.chart);
  if (w.divergent) return ExtendedReal::plus_infinity();
  const double i0 = detail::integrate([&](double t) { return std::exp(g(t) - w.log_peak); }, w.lo, w.hi,
                                      c.chart.breaks);
  return ExtendedReal::finite(std::exp(w.log_peak) * i0);
}

double z_star(const ScalarDistribution& dist, const Normalizer& norm) {
  const ExtendedReal eu = expected_normalizer(dist, norm);
  if (!eu.is_finite()) return 0.0;
  const ExtendedReal ex = dist.mean();
  if (!ex.is_finite() || ex.value() <= 0.0) return 0.0;
  return std::max(0.0, ex.value() / norm.inverse_positive(eu.value()));
}

std::optional<double> truncated_moment_ratio(const ScalarDistribution& dist, double x_cut, double p) {
  if (!(x_cut > 0.0) || !(p > 1.0)) throw PreconditionError("truncated_moment_ratio needs x_cut > 0, p > 1");
  double first = 0.0, pth = 0.0;
  if (dist.is_discrete()) {
    for (const Atom& at : dist.atoms()) {
      const double t = std::abs(at.value);
      if (t <= x_cut) {
        first += at.prob * t;
        pth += at.prob * std::pow(t, p);
      }
    }
  } else if (const auto* pa = std::get_if<ShiftedPareto>(&dist.variant()); pa && pa->shift == 0.0) {
    if (x_cut < pa->scale) return std::nullopt;
    const double a = pa->tail_index, s = pa->scale;
    auto power_integral = [&](double k) {  // int_s^x t^k dF(t)
      const double e = k - a;
      if (e == 0.0) return a * std::pow(s, a) * std::log(x_cut / s);
      return a * std::pow(s, a) * (std::pow(x_cut, e) - std::pow(s, e)) / e;
    };
    first = power_integral(1.0);
    pth = power_integral(p);
  } else {
    const ContinuousChart c = make_chart(dist, Normalizer::power_law(p), {});
    double lo = c.chart.lo, hi = c.chart.hi;
    if (const auto* g = std::get_if<Gaussian>(&dist.variant())) {
      lo = std::max(-x_cut, g->mu - 40.0 * g->sigma);
      hi = std::min(x_cut, g->mu + 40.0 * g->sigma);
    } else {
      const auto& q = std::get<ShiftedPareto>(dist.variant());
      if (x_cut - q.shift <= q.scale) return std::nullopt;
      hi = std::log((x_cut - q.shift) / q.scale);
      if (-x_cut - q.shift > q.scale) lo = std::log((-x_cut - q.shift) / q.scale);
    }
    if (!(hi > lo)) return std::nullopt;
    std::vector<double> breaks;
    for (double t = lo; t <= hi; t += (hi - lo) / 64.0) breaks.push_back(t);
    if (std::get_if<Gaussian>(&dist.variant())) breaks.push_back(0.0);
    auto dens = [&](double t) { return std::exp(c.log_density(t)); };
    first = detail::integrate([&](double t) { return std::abs(c.x_of(t)) * dens(t); }, lo, hi, breaks, 1e-12, 1e-14);
    pth = detail::integrate([&](double t) { return std::pow(std::abs(c.x_of(t)), p) * dens(t); }, lo, hi, breaks,
                            1e-12, 1e-14);
  }
  if (!(pth > 0.0)) return std::nullopt;
  return std::pow(first, p) / pth;
}

// ------------------------------------------------------------ sampling

TiltedSampler::TiltedSampler(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam)
    : dist_(dist), norm_(norm), lam_(lam) {
  const bool untilted = lam.lambda1 == 0.0 && lam.lambda2 == 0.0;
  if (!untilted && !in_cumulant_interior(dist, norm, lam))
    throw DomainError("tilted sampling outside the cumulant interior");
  if (dist.is_discrete()) {
    method_ = Method::table;
    const auto as = dist.atoms();
    std::vector<double> logw;
    double top = -kInf;
    for (const Atom& at : as) {
      logw.push_back(std::log(at.prob) + tilt_term(lam.lambda1, at.value) + tilt_term(lam.lambda2, norm(at.value)));
      top = std::max(top, logw.back());
    }
    double total = 0.0;
    for (std::size_t i = 0; i < as.size(); ++i) {
      total += std::exp(logw[i] - top);
      values_.push_back(as[i].value);
      cumulative_.push_back(total);
    }
    for (double& c : cumulative_) c /= total;
    log_mgf_ = top + std::log(total);
    return;
  }
  log_mgf_ = cumulant(dist, norm, lam).value();
  if (const auto* g = std::get_if<Gaussian>(&dist.variant())) {
    if (is_quadratic(norm)) {
      method_ = Method::gaussian;
      const double k = 1.0 - 2.0 * lam.lambda2 * g->sigma * g->sigma;
      loc_ = (g->mu + lam.lambda1 * g->sigma * g->sigma) / k;
      sd_ = g->sigma / std::sqrt(k);
      return;
    }
    if (lam.lambda2 > 0.0) throw DomainError("rejection sampling needs lambda2 <= 0 for this normalizer");
    method_ = Method::gaussian_rejection;
    loc_ = g->mu + lam.lambda1 * g->sigma * g->sigma;
    sd_ = g->sigma;
    return;
  }
  const auto& pa = std::get<ShiftedPareto>(dist.variant());
  method_ = Method::pareto_rejection;
  // sup of the concave exponent lambda1 x + lambda2 u(x) over the support.
  auto h = [&](double x) { return tilt_term(lam.lambda1, x) + tilt_term(lam.lambda2, norm(x)); };
  const double x0 = pa.shift + pa.scale;
  double right = x0 + pa.scale;
  while (h(right) >= h(x0) && right < 1e300) right = x0 + 2.0 * (right - x0);
  const auto [x_opt, neg] = boost::math::tools::brent_find_minima([&](double x) { return -h(x); }, x0, right, 52);
  envelope_ = std::max(h(x0), -neg) + 1e-12 * std::max(1.0, std::abs(neg));
  (void)x_opt;
}

double TiltedSampler::operator()(RngStream& rng) const {
  switch (method_) {
    case Method::table: {
      const double u = rng.uniform();
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      return values_[std::min<std::size_t>(it - cumulative_.begin(), values_.size() - 1)];
    }
    case Method::gaussian:
      return loc_ + sd_ * rng.normal();
    case Method::gaussian_rejection:
      for (long attempt = 0; attempt < 100'000'000; ++attempt) {
        const double x = loc_ + sd_ * rng.normal();
        if (std::log(rng.uniform()) < tilt_term(lam_.lambda2, norm_(x))) return x;
      }
      break;
    case Method::pareto_rejection: {
      const auto& pa = std::get<ShiftedPareto>(dist_.variant());
      for (long attempt = 0; attempt < 100'000'000; ++attempt) {
        const double x = pa.shift + pa.scale * std::pow(rng.uniform(), -1.0 / pa.tail_index);
        const double h = tilt_term(lam_.lambda1, x) + tilt_term(lam_.lambda2, norm_(x));
        if (std::log(rng.uniform()) < h - envelope_) return x;
      }
      break;
    }
  }
  throw NumericFailure("tilted rejection sampler exhausted its attempts", 0.0);
}

double tilted_sample(const ScalarDistribution& dist, const Normalizer& norm, TiltVector lam, RngStream& rng) {
  return TiltedSampler(dist, norm, lam)(rng);
}

}  // namespace selfnorm
