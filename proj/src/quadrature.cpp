#include "quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <queue>

#include "selfnorm/errors.hpp"

namespace selfnorm::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe(const std::function<double(double)>& g, double t) {
  const double v = g(t);
  return std::isnan(v) ? -kInf : v;
}

struct Panel {
  double a;
  double b;
  double value;
  double error;
  double l1;

  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0, l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
  // The fixed rule reports its error on the reference interval [-1, 1].
  return {a, b, v, err * 0.5 * (b - a), l1};
}

// Globally adaptive: always bisect the panel with the largest error estimate.
Panel adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  constexpr int kMaxPanels = 4000;
  std::priority_queue<Panel> heap;
  Panel total = kronrod(f, a, b);
  heap.push(total);
  while (static_cast<int>(heap.size()) < kMaxPanels && total.error > std::max(abs_tol, rel_tol * total.l1)) {
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const Panel left = kronrod(f, worst.a, mid), right = kronrod(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    total.value += left.value + right.value - worst.value;
    total.error += left.error + right.error - worst.error;
    total.l1 += left.l1 + right.l1 - worst.l1;
  }
  // Re-sum to shed drift from the running updates.
  total.value = total.error = total.l1 = 0.0;
  for (; !heap.empty(); heap.pop()) {
    total.value += heap.top().value;
    total.error += heap.top().error;
    total.l1 += heap.top().l1;
  }
  return total;
}

}  // namespace

Window find_window(const std::function<double(double)>& g, const Chart& chart) {
  std::vector<double> ts = chart.hints;
  ts.push_back(chart.center);
  for (int k = -4; k <= 48; ++k) {
    const double d = chart.scale * std::ldexp(1.0, k);
    ts.push_back(chart.center + d);
    ts.push_back(chart.center - d);
    if (std::isfinite(chart.lo)) ts.push_back(chart.lo + d);
  }
  if (std::isfinite(chart.lo)) ts.push_back(chart.lo);
  if (std::isfinite(chart.hi)) ts.push_back(chart.hi);
  std::erase_if(ts, [&](double t) { return !(t >= chart.lo && t <= chart.hi) || !std::isfinite(t); });
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  Window w;
  std::vector<double> gs(ts.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    gs[i] = safe(g, ts[i]);
    if (gs[i] == kInf) {
      w.divergent = true;
      return w;
    }
    if (gs[i] > gs[best]) best = i;
  }
  if (gs[best] == -kInf) throw NumericFailure("log integrand is -inf everywhere", 0.0);
  // A maximum on an unbounded end means no decay in that direction.
  const bool open_hi = !std::isfinite(chart.hi) || chart.hi_is_cap;
  if ((best == 0 && !std::isfinite(chart.lo)) || (best + 1 == ts.size() && open_hi)) {
    w.divergent = true;
    return w;
  }

  const double a = ts[best == 0 ? 0 : best - 1];
  const double b = ts[best + 1 == ts.size() ? best : best + 1];
  auto neg = [&](double t) { return -safe(g, t); };
  const auto [t_opt, neg_opt] = boost::math::tools::brent_find_minima(neg, a, b, 52);
  w.peak = ts[best];
  w.log_peak = gs[best];
  if (-neg_opt > w.log_peak) {
    w.peak = t_opt;
    w.log_peak = -neg_opt;
  }

  // Local width from the second difference; narrow peaks need small steps.
  w.width = chart.scale;
  for (double h = 1e-3 * chart.scale; h > 1e-12 * chart.scale; h *= 0.1) {
    const double lo = w.peak - h, hi = w.peak + h;
    if (!(lo >= chart.lo && hi <= chart.hi)) continue;
    const double curv = (safe(g, lo) - 2.0 * w.log_peak + safe(g, hi)) / (h * h);
    if (std::isfinite(curv) && curv < 0.0) {
      w.width = std::min(chart.scale, 1.0 / std::sqrt(-curv));
      break;
    }
  }

  auto expand = [&](double direction, double bound) {
    double step = 0.25 * w.width;
    double t = w.peak;
    int below = 0;
    for (int iter = 0; iter < 2000; ++iter) {
      double next = t + direction * step;
      if ((direction > 0 && next >= bound) || (direction < 0 && next <= bound)) return bound;
      t = next;
      const double v = safe(g, t);
      if (v == kInf) {
        w.divergent = true;
        return t;
      }
      below = (v < w.log_peak - kTailDrop) ? below + 1 : 0;
      if (below == 2) return t;
      if (v > w.log_peak) w.log_peak = v;
      step *= 1.5;
      if (step > 1e30 * chart.scale) break;
    }
    w.divergent = true;
    return t;
  };
  w.hi = expand(+1.0, chart.hi);
  if (!w.divergent && chart.hi_is_cap && w.hi == chart.hi && safe(g, w.hi) >= w.log_peak - kTailDrop)
    w.divergent = true;
  if (!w.divergent) w.lo = expand(-1.0, chart.lo);
  return w;
}

double integrate(const std::function<double(double)>& f, double a, double b, const std::vector<double>& breaks,
                 double rel_tol, double abs_tol) {
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0, total_err = 0.0, total_l1 = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    const Panel p = adaptive(f, cuts[i], cuts[i + 1], rel_tol, abs_tol / static_cast<double>(cuts.size() - 1));
    total += p.value;
    total_err += p.error;
    total_l1 += p.l1;
  }
  if (!std::isfinite(total) || total_err > abs_tol + 1e3 * rel_tol * total_l1)
    throw NumericFailure("adaptive quadrature did not converge", total_err);
  return total;
}

}  // namespace selfnorm::detail
