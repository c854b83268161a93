#include "selfnorm/legendre.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <limits>
#include <thread>

#include "selfnorm/errors.hpp"

namespace selfnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

}  // namespace

RatePoint rate_at(const ScalarDistribution& dist, const Normalizer& norm, const Eigen::Vector2d& alpha,
                  const NewtonOptions& opts) {
  if (is_degenerate(dist, norm))
    throw DegeneracyError("(X, u(X)) is supported on a line; use the two-point routines");

  RatePoint out;
  out.alpha = alpha;
  TiltVector lam = opts.start;
  if (!in_cumulant_interior(dist, norm, lam)) lam = {0.0, -1.0};
  if (!in_cumulant_interior(dist, norm, lam)) lam = {0.0, 0.0};

  TiltedMoments m = tilted_moments(dist, norm, lam);
  double phi = alpha.dot(lam.vec()) - m.log_mgf;
  double res = (alpha - m.mean).norm();
  out.lower_bound = phi;
  int polish = 0;
  std::vector<double> history;

  for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
    if (res <= opts.tolerance) {
      // polish a few more steps
      if (res <= 1e-3 * opts.tolerance || polish++ >= 3) {
        out.converged = true;
        break;
      }
    }
    const Eigen::Vector2d r = alpha - m.mean;
    Eigen::Matrix2d h = m.cov;
    Eigen::Vector2d dir;
    Eigen::LDLT<Eigen::Matrix2d> ldlt(h);
    const double scale = std::max(h.trace(), 1e-300);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && h.determinant() > 1e-14 * scale * scale) {
      dir = ldlt.solve(r);
    } else {
      h += 1e-8 * scale * Eigen::Matrix2d::Identity();
      dir = h.ldlt().solve(r);
    }
    if (!dir.allFinite()) break;
    const double max_step = std::max(2.0, lam.vec().norm());
    if (dir.norm() > max_step) dir *= max_step / dir.norm();

    struct Step {
      bool accepted = false;
      double t = 0.0;
      TiltVector lam;
      TiltedMoments m;
      double phi = 0.0;
      double res = 0.0;
    };
    auto line_search = [&](const Eigen::Vector2d& d) {
      Step s;
      double t = 1.0;
      for (int halving = 0; halving <= opts.max_halvings; ++halving, t *= 0.5) {
        const TiltVector trial = TiltVector::from(lam.vec() + t * d);
        if (!in_cumulant_interior(dist, norm, trial)) continue;
        try {
          const ExtendedReal a = cumulant(dist, norm, trial);
          if (!a.is_finite()) continue;
          const double phi_trial = alpha.dot(trial.vec()) - a.value();
          const bool ascent = phi_trial > phi;
          const bool flat = phi_trial >= phi - 1e-15 * std::max(1.0, std::abs(phi));
          if (!ascent && !flat) continue;
          const TiltedMoments mt = tilted_moments(dist, norm, trial);
          const double res_trial = (alpha - mt.mean).norm();
          if (!std::isfinite(res_trial) || (!ascent && !(res_trial < res))) continue;
          return Step{true, t, trial, mt, phi_trial, res_trial};
        } catch (const NumericFailure&) {
          continue;  // an unevaluable trial is treated like one outside the domain
        }
      }
      return s;
    };

    Step step = line_search(dir);
    if (!step.accepted || step.t < 1.0 / 64) {
      // The full step ran into the domain wall; Newton in one coordinate at a
      // time can still slide along it.
      for (int k = 0; k < 2; ++k) {
        if (!(m.cov(k, k) > 0.0)) continue;
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        d(k) = r(k) / m.cov(k, k);
        if (d.norm() > max_step) d *= max_step / d.norm();
        const Step alt = line_search(d);
        if (alt.accepted && (!step.accepted || alt.phi > step.phi)) step = alt;
      }
    }
    const bool accepted = step.accepted;
    if (accepted) {
      lam = step.lam;
      m = step.m;
      phi = step.phi;
      res = step.res;
    }
    out.lower_bound = std::max(out.lower_bound, phi);
    if (!accepted) break;
    // Objective no longer moving while the residual stays large: the
    // supremum is not attained.
    history.push_back(phi);
    constexpr std::size_t kWindow = 25;
    if (history.size() > kWindow && res > opts.tolerance &&
        phi - history[history.size() - 1 - kWindow] <= 1e-11 * std::max(1.0, std::abs(phi)))
      break;
    if (lam.vec().norm() > opts.divergence_norm) break;
  }
  if (!out.converged && res <= opts.tolerance) out.converged = true;

  out.tilt = lam;
  out.residual = res;
  out.lower_bound = std::max(out.lower_bound, phi);
  out.rate = out.converged ? ExtendedReal::finite(std::max(0.0, phi)) : ExtendedReal::plus_infinity();
  return out;
}

UnivariateRate univariate_rate(const UnivariateLaw& xi, double a) {
  if (xi.mean.is_plus_infinity() || (xi.mean.is_finite() && xi.mean.value() >= a))
    throw PreconditionError("univariate_rate needs E xi < a (not a large deviation)");

  auto f = [&](double lambda) {
    if (lambda == 0.0) return 0.0;
    const ExtendedReal k = xi.log_mgf(lambda);
    if (k.is_plus_infinity()) return kInf;
    if (k.is_minus_infinity()) return -kInf;
    return k.value() - lambda * a;
  };

  UnivariateRate out;
  constexpr double kCap = 0x1.0p40;
  double lo = 0.0, mid = 1.0;
  double f_mid = f(mid);
  while (!(f_mid < 0.0) && mid > 1e-300) {  // shrink into the domain / the descent region
    mid *= 0.5;
    f_mid = f(mid);
  }
  if (!(f_mid < 0.0)) {
    out.rate = ExtendedReal::finite(0.0);
    return out;
  }
  double hi = 2.0 * mid;
  double f_hi = f(hi);
  // Doubling stops once f turns upward; a plateau to round-off means the
  // infimum is only approached as lambda grows without bound.
  while (f_hi <= f_mid + 1e-13 * std::max(1.0, std::abs(f_mid))) {
    if (f_hi >= f_mid - 1e-13 * std::max(1.0, std::abs(f_mid)) && hi >= 64.0) {
      out.rate = ExtendedReal::finite(-std::min(f_mid, f_hi));
      out.lambda = hi;
      out.boundary = true;
      return out;
    }
    if (f_hi == -kInf) {
      out.rate = ExtendedReal::plus_infinity();
      out.lambda = hi;
      out.boundary = true;
      return out;
    }
    if (hi >= kCap) {
      // Still falling linearly: a lies beyond the essential supremum of xi.
      const bool linear = f_hi - f_mid < -1e-9 * (hi - mid);
      out.rate = linear ? ExtendedReal::plus_infinity() : ExtendedReal::finite(-f_hi);
      out.lambda = hi;
      out.boundary = true;
      return out;
    }
    lo = mid;
    mid = hi;
    f_mid = f_hi;
    hi *= 2.0;
    f_hi = f(hi);
  }

  // Golden-section on [lo, hi] around mid.
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    }
  }
  double best_x = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  if (f_mid < best_f) {
    best_f = f_mid;
    best_x = mid;
  }
  out.rate = ExtendedReal::finite(-best_f);
  out.lambda = best_x;
  return out;
}

ContourGrid contour(const ScalarDistribution& dist, const Normalizer& norm, const GridSpec& spec, EvalOrder order,
                    unsigned threads) {
  if (spec.n1 < 1 || spec.n2 < 1) throw PreconditionError("contour grid needs a positive resolution");
  ContourGrid grid;
  grid.spec = spec;
  auto axis = [](const Interval& iv, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? iv.lo : iv.lo + (iv.hi - iv.lo) * i / (n - 1);
    return v;
  };
  grid.x1s = axis(spec.x1, spec.n1);
  grid.x2s = axis(spec.x2, spec.n2);
  grid.cells.resize(static_cast<std::size_t>(spec.n1) * spec.n2);

  auto cell = [&](int i1, int i2) -> RatePoint& { return grid.cells[static_cast<std::size_t>(i2) * spec.n1 + i1]; };
  auto evaluate = [&](int i1, int i2, int first_row) {
    NewtonOptions opts;
    if (i1 > 0 && cell(i1 - 1, i2).converged) {
      opts.start = cell(i1 - 1, i2).tilt;
    } else if (i2 > first_row && cell(i1, i2 - 1).converged) {
      opts.start = cell(i1, i2 - 1).tilt;
    }
    cell(i1, i2) = rate_at(dist, norm, {grid.x1s[i1], grid.x2s[i2]}, opts);
  };
  auto run_rows = [&](int row_lo, int row_hi) {
    if (order == EvalOrder::row_major) {
      for (int i2 = row_lo; i2 < row_hi; ++i2)
        for (int i1 = 0; i1 < spec.n1; ++i1) evaluate(i1, i2, row_lo);
    } else {
      for (int i1 = 0; i1 < spec.n1; ++i1)
        for (int i2 = row_lo; i2 < row_hi; ++i2) evaluate(i1, i2, row_lo);
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, spec.n2));
  if (threads == 1) {
    run_rows(0, spec.n2);
    return grid;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    const int lo = static_cast<int>(static_cast<long>(spec.n2) * t / threads);
    const int hi = static_cast<int>(static_cast<long>(spec.n2) * (t + 1) / threads);
    pool.emplace_back(run_rows, lo, hi);
  }
  for (auto& th : pool) th.join();
  return grid;
}

std::string contour_csv(const ContourGrid& grid) {
  std::string out = "x1,x2,rate\n";
  for (int i2 = 0; i2 < grid.spec.n2; ++i2)
    for (int i1 = 0; i1 < grid.spec.n1; ++i1) {
      const RatePoint& c = grid.at(i1, i2);
      out += fmt(grid.x1s[i1]) + "," + fmt(grid.x2s[i2]) + "," + (c.converged ? fmt(c.rate.to_double()) : "inf") +
             "\n";
    }
  return out;
}

}  // namespace selfnorm
