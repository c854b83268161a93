#include "selfnorm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "selfnorm/errors.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/rng.hpp"
#include "selfnorm/shao_rate.hpp"

namespace selfnorm {

namespace {

constexpr long kChunk = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Streaming log-sum-exp of w and w^2.
struct LogSums {
  double max = -kInf;
  double s1 = 0.0;  // sum exp(lw - max)
  double s2 = 0.0;  // sum exp(2 (lw - max))
  long hits = 0;

  void add(double lw) {
    ++hits;
    if (lw > max) {
      const double r = std::exp(max - lw);
      s1 = s1 * r + 1.0;
      s2 = s2 * r * r + 1.0;
      max = lw;
    } else {
      const double e = std::exp(lw - max);
      s1 += e;
      s2 += e * e;
    }
  }
  void merge(const LogSums& o) {
    hits += o.hits;
    if (o.hits == 0) return;
    if (hits == o.hits) {
      max = o.max;
      s1 = o.s1;
      s2 = o.s2;
      return;
    }
    const double m = std::max(max, o.max);
    const double a = std::exp(max - m), b = std::exp(o.max - m);
    s1 = s1 * a + o.s1 * b;
    s2 = s2 * a * a + o.s2 * b * b;
    max = m;
  }
  double log1() const { return hits ? max + std::log(s1) : -kInf; }
  double log2() const { return hits ? 2 * max + std::log(s2) : -kInf; }
};

unsigned thread_count(unsigned requested, long chunks) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<long>(t, std::max(1L, chunks)));
}

void validate(long n, const McOptions& opts) {
  if (n < 1) throw PreconditionError("n must be positive");
  if (opts.trials < 1) throw PreconditionError("trials must be positive");
}

}  // namespace

std::string to_string(McMethod m) { return m == McMethod::direct ? "direct" : "importance"; }

McEstimate tilted_path_mc(const ScalarDistribution& dist, const Normalizer& norm, long n, TiltVector lam,
                          const PathEvent& event, const McOptions& opts) {
  validate(n, opts);
  const TiltedSampler sampler(dist, norm, lam);
  const double n_a = static_cast<double>(n) * sampler.log_mgf();
  const bool tilted = lam.lambda1 != 0.0 || lam.lambda2 != 0.0;

  const long chunks = (opts.trials + kChunk - 1) / kChunk;
  std::vector<LogSums> parts(chunks);
  std::atomic<long> next{0};
  auto work = [&] {
    for (long c = next++; c < chunks; c = next++) {
      LogSums acc;
      const long end = std::min(opts.trials, (c + 1) * kChunk);
      for (long i = c * kChunk; i < end; ++i) {
        RngStream rng(opts.seed, static_cast<std::uint64_t>(i));
        double s = 0.0, t = 0.0;
        for (long k = 0; k < n; ++k) {
          const double x = sampler(rng);
          s += x;
          t += norm(x);
        }
        if (!event(s, t)) continue;
        acc.add(tilted ? -(lam.lambda1 * s + lam.lambda2 * t) + n_a : 0.0);
      }
      parts[c] = acc;
    }
  };
  const unsigned nt = thread_count(opts.threads, chunks);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nt; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  LogSums total;
  for (const LogSums& p : parts) total.merge(p);

  McEstimate e;
  e.n = n;
  e.trials = opts.trials;
  e.seed = opts.seed;
  e.hits = total.hits;
  e.tilt = lam;
  const double ln_n = std::log(static_cast<double>(opts.trials));
  e.log_value = total.log1() - ln_n;
  e.value = std::exp(e.log_value);
  if (total.hits > 0) {
    // Second moment over squared mean, both per trial.
    const double ratio = std::exp(total.log2() - ln_n - 2 * e.log_value);
    e.rel_error = opts.trials > 1 ? std::sqrt(std::max(0.0, ratio - 1.0) / (opts.trials - 1)) : kInf;
    e.std_error = e.value * e.rel_error;
    e.ess = std::exp(2 * total.log1() - total.log2());
  } else {
    e.rel_error = kInf;
  }
  return e;
}

McEstimate direct_mc(const ScalarDistribution& dist, const Normalizer& norm, double z, long n,
                     const McOptions& opts) {
  const double nd = static_cast<double>(n);
  auto event = [&](double s, double t) { return in_target_set({s / nd, t / nd}, z, norm); };
  McEstimate e = tilted_path_mc(dist, norm, n, {0.0, 0.0}, event, opts);
  e.method = McMethod::direct;
  const double p = static_cast<double>(e.hits) / static_cast<double>(opts.trials);
  e.value = p;
  e.log_value = std::log(p);
  e.std_error = std::sqrt(p * (1 - p) / static_cast<double>(opts.trials));
  e.rel_error = p > 0 ? e.std_error / p : kInf;
  e.ess = static_cast<double>(opts.trials);
  return e;
}

McEstimate importance_mc(const ScalarDistribution& dist, const Normalizer& norm, double z, long n,
                         const McOptions& opts) {
  if (!(z < 1.0)) throw PreconditionError("importance sampling needs z < 1");
  const BoundarySolution sol = dominating_point(dist, norm, z);
  if (sol.at_origin) throw PreconditionError("dominating point is the origin; no finite tilt to sample at");
  if (!std::isfinite(sol.tilt.lambda1) || !std::isfinite(sol.tilt.lambda2))
    throw PreconditionError("dominating tilt is not finite");
  const double nd = static_cast<double>(n);
  auto event = [&](double s, double t) { return in_target_set({s / nd, t / nd}, z, norm); };
  McEstimate e = tilted_path_mc(dist, norm, n, sol.tilt, event, opts);
  e.method = McMethod::importance;
  return e;
}

std::vector<TrendPoint> rate_trend(const ScalarDistribution& dist, const Normalizer& norm, double z,
                                   const std::vector<long>& n_schedule, const McOptions& opts) {
  std::vector<TrendPoint> out;
  for (long n : n_schedule) {
    TrendPoint tp;
    tp.n = n;
    tp.estimate = importance_mc(dist, norm, z, n, opts);
    tp.log_rate = tp.estimate.log_value / static_cast<double>(n);
    out.push_back(tp);
  }
  return out;
}

std::string mc_csv_header() { return "method,n,trials,seed,estimate,std_error,ess"; }

std::string mc_csv_row(const McEstimate& e) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(e.method) << ',' << e.n << ',' << e.trials << ',' << e.seed << ',' << e.value << ','
     << e.std_error << ',' << e.ess;
  return os.str();
}

}  // namespace selfnorm
