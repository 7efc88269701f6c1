#pragma once

// Minimal orbits of the billiard map found variationally: critical points of
// the discrete action sum h(t_n, t_{n+1}) with t_{n+q} = t_n + p.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bbill/bmap.hpp"
#include "bbill/detail/numeric.hpp"
#include "bbill/error.hpp"
#include "bbill/genfun.hpp"

namespace bbill {

struct MinimalOrbit {
  long p = 0;
  long q = 0;
  std::vector<double> times;  // t_0 .. t_{q-1}, t_0 in [0, 1)
  std::vector<double> Ks;     // K_n = d1 h(t_n, t_{n+1})
  double action = 0.0;
  double residual = 0.0;
  bool monotone = false;
  int starts = 0;
  int converged_starts = 0;
  std::uint64_t seed = 0;
  double gap_lo = 0.0;  // admissible box for t_{n+1} - t_n
  double gap_hi = 0.0;
};

struct HullSample {
  double omega = 0.0;
  long p = 0;
  long q = 0;
  std::vector<double> xs;
  std::vector<double> phi;
  std::vector<double> eta;
};

namespace detail {

inline PairTerms lifted_pair(const GenFunContext& ctx, double t0, double t1) {
  return pair_terms(ctx, t0, t1 - t0, false);
}

inline double time_at(const std::vector<double>& t, long p, long n) {
  const long q = static_cast<long>(t.size());
  const long m = ((n % q) + q) % q;
  const long wraps = (n - m) / q;
  return t[static_cast<std::size_t>(m)] + static_cast<double>(wraps * p);
}

}  // namespace detail

// Sum of h over consecutive pairs of an open sequence.
inline double action(const GenFunContext& ctx, const std::vector<double>& times) {
  if (times.size() < 2) throw PreconditionError("action: need at least two times");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    sum += h_gap(ctx, times[i], times[i + 1] - times[i]);
  }
  return sum;
}

// Action of one period of a (p, q) sequence t_0..t_{q-1}, t_q = t_0 + p.
inline double periodic_action(const GenFunContext& ctx, const std::vector<double>& times, long p) {
  if (times.empty()) throw PreconditionError("periodic_action: empty sequence");
  const long q = static_cast<long>(times.size());
  double sum = 0.0;
  for (long n = 0; n < q; ++n) {
    const double a = detail::time_at(times, p, n);
    sum += h_gap(ctx, a, detail::time_at(times, p, n + 1) - a);
  }
  return sum;
}

// max_n |d2 h(t_{n-1}, t_n) + d1 h(t_n, t_{n+1})| over a periodic sequence.
inline double el_residual(const GenFunContext& ctx, const std::vector<double>& times, long p) {
  if (times.empty()) throw PreconditionError("el_residual: empty sequence");
  const long q = static_cast<long>(times.size());
  double worst = 0.0;
  for (long n = 0; n < q; ++n) {
    const double tm = detail::time_at(times, p, n - 1);
    const double t = detail::time_at(times, p, n);
    const double tp = detail::time_at(times, p, n + 1);
    const double g = grad_h_gap(ctx, tm, t - tm).d2 + grad_h_gap(ctx, t, tp - t).d1;
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

// Same residual over the interior points of an open sequence.
inline double el_residual_open(const GenFunContext& ctx, const std::vector<double>& times) {
  if (times.size() < 3) throw PreconditionError("el_residual_open: need at least three times");
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < times.size(); ++n) {
    const double g = grad_h_gap(ctx, times[n - 1], times[n] - times[n - 1]).d2 +
                     grad_h_gap(ctx, times[n], times[n + 1] - times[n]).d1;
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

namespace detail {

struct DescentResult {
  std::vector<double> times;
  double action = kInf;
  double residual = kInf;
  bool converged = false;
};

class PeriodicDescent {
 public:
  PeriodicDescent(const GenFunContext& ctx, long p, long q, double lo, double hi, double k_scale)
      : ctx_(ctx), p_(p), q_(q), lo_(lo), hi_(hi), ftol_(1e-14 * k_scale) {}

  DescentResult run(std::vector<double> t) const {
    constexpr int kMaxSweeps = 4000;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double moved = 0.0;
      for (long n = 0; n < q_; ++n) moved = std::max(moved, update(t, n));
      if (moved < 1e-13 * std::max(1.0, static_cast<double>(p_))) break;
    }
    polish(t);
    DescentResult r;
    r.residual = gradient_norm(t);
    r.action = periodic_action(ctx_, t, p_);
    r.converged = r.residual < 1e-8 && feasible(t, 0.0);
    r.times = std::move(t);
    return r;
  }

 private:
  double at(const std::vector<double>& t, long n) const { return time_at(t, p_, n); }

  // Local action in t_n with neighbours frozen, its derivative and curvature.
  double local_f(const std::vector<double>& t, long n, double x) const {
    if (q_ == 1) return h_value(lifted_pair(ctx_, x, x + p_));
    return h_value(lifted_pair(ctx_, at(t, n - 1), x)) + h_value(lifted_pair(ctx_, x, at(t, n + 1)));
  }
  double local_g(const std::vector<double>& t, long n, double x) const {
    if (q_ == 1) {
      const auto pt = lifted_pair(ctx_, x, x + p_);
      return h1_value(pt) + h2_value(pt);
    }
    return h2_value(lifted_pair(ctx_, at(t, n - 1), x)) + h1_value(lifted_pair(ctx_, x, at(t, n + 1)));
  }
  double local_a(const std::vector<double>& t, long n, double x) const {
    if (q_ == 1) {
      const auto pt = lifted_pair(ctx_, x, x + p_);
      return h11_value(pt) + 2.0 * h12_value(pt) + h22_value(pt);
    }
    return h22_value(lifted_pair(ctx_, at(t, n - 1), x)) +
           h11_value(lifted_pair(ctx_, x, at(t, n + 1)));
  }

  // Global minimization of the local action over the admissible interval:
  // sampled derivative, every descent-to-ascent bracket solved, best value kept.
  double update(std::vector<double>& t, long n) const {
    const double cur = t[static_cast<std::size_t>(n)];
    double a = cur - 0.5;
    double b = cur + 0.5;
    if (q_ > 1) {
      a = std::max(at(t, n - 1) + lo_, at(t, n + 1) - hi_);
      b = std::min(at(t, n - 1) + hi_, at(t, n + 1) - lo_);
    }
    if (!(b > a)) return 0.0;
    constexpr int kSamples = 16;
    std::vector<double> cands{cur};
    double xprev = a;
    double gprev = local_g(t, n, a);
    if (gprev > 0.0) cands.push_back(a);
    for (int i = 1; i <= kSamples; ++i) {
      const double x = a + (b - a) * i / kSamples;
      const double g = local_g(t, n, x);
      if (gprev < 0.0 && g > 0.0) {
        auto gf = [&](double y) { return local_g(t, n, y); };
        auto af = [&](double y) { return local_a(t, n, y); };
        cands.push_back(safeguarded_root(gf, af, xprev, x, ftol_).x);
      } else if (g == 0.0) {
        cands.push_back(x);
      }
      xprev = x;
      gprev = g;
    }
    if (gprev < 0.0) cands.push_back(b);
    double best = cur;
    double fbest = local_f(t, n, cur);
    for (double x : cands) {
      const double f = local_f(t, n, x);
      if (f < fbest) {
        fbest = f;
        best = x;
      }
    }
    t[static_cast<std::size_t>(n)] = best;
    return std::abs(best - cur);
  }

  Eigen::VectorXd gradient(const std::vector<double>& t) const {
    Eigen::VectorXd g(q_);
    for (long n = 0; n < q_; ++n) g(n) = local_g(t, n, t[static_cast<std::size_t>(n)]);
    return g;
  }

  double gradient_norm(const std::vector<double>& t) const {
    return gradient(t).cwiseAbs().maxCoeff();
  }

  Eigen::MatrixXd hessian(const std::vector<double>& t) const {
    Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(q_, q_);
    if (q_ == 1) {
      hm(0, 0) = local_a(t, 0, t[0]);
      return hm;
    }
    for (long n = 0; n < q_; ++n) {
      hm(n, n) = local_a(t, n, t[static_cast<std::size_t>(n)]);
      const long m = (n + 1) % q_;
      const double off = h12_value(lifted_pair(ctx_, at(t, n), at(t, n + 1)));
      hm(n, m) += off;
      hm(m, n) += off;
    }
    return hm;
  }

  bool feasible(const std::vector<double>& t, double slack) const {
    for (long n = 0; n < q_; ++n) {
      const double gap = at(t, n + 1) - at(t, n);
      if (gap < lo_ - slack || gap > hi_ + slack) return false;
    }
    return true;
  }

  // Damped Newton on the full gradient: quadratic finish after the sweeps.
  void polish(std::vector<double>& t) const {
    for (int it = 0; it < 40; ++it) {
      const Eigen::VectorXd g = gradient(t);
      const double r0 = g.cwiseAbs().maxCoeff();
      if (r0 <= ftol_) return;
      const Eigen::VectorXd d = hessian(t).fullPivLu().solve(-g);
      if (!d.allFinite()) return;
      bool accepted = false;
      for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
        std::vector<double> trial = t;
        for (long n = 0; n < q_; ++n) trial[static_cast<std::size_t>(n)] += lambda * d(n);
        if (!feasible(trial, 0.0)) continue;
        if (gradient_norm(trial) < r0) {
          t = std::move(trial);
          accepted = true;
          break;
        }
      }
      if (!accepted) return;
    }
  }

  const GenFunContext& ctx_;
  long p_;
  long q_;
  double lo_;
  double hi_;
  double ftol_;
};

// Cyclic relabelling and integer shift so that t_0 has the smallest phase.
inline std::vector<double> normalize_orbit(const std::vector<double>& t, long p) {
  const long q = static_cast<long>(t.size());
  long k = 0;
  double best = 2.0;
  for (long n = 0; n < q; ++n) {
    const double ph = t[static_cast<std::size_t>(n)] - std::floor(t[static_cast<std::size_t>(n)]);
    if (ph < best) {
      best = ph;
      k = n;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(q));
  for (long n = 0; n < q; ++n) out[static_cast<std::size_t>(n)] = time_at(t, p, n + k);
  const double shift = std::floor(out.front());
  for (double& x : out) x -= shift;
  return out;
}

}  // namespace detail

// Admissible gap box [max(beta, w - 1), min(sigma - beta, w + 1)] with
// beta = min(w - 1, sigma - w - 1) / 2.
inline std::pair<double, double> orbit_gap_box(double omega, double sigma) {
  const double beta = 0.5 * std::min(omega - 1.0, sigma - omega - 1.0);
  return {std::max(beta, omega - 1.0), std::min(sigma - beta, omega + 1.0)};
}

inline MinimalOrbit periodic_orbit(const GenFunContext& ctx, long p, long q, int starts,
                                   std::uint64_t seed) {
  if (q < 1) throw PreconditionError("periodic_orbit: q must be positive");
  if (starts < 1) throw PreconditionError("periodic_orbit: need at least one start");
  const double sigma = ctx.sigma;
  const double omega = static_cast<double>(p) / static_cast<double>(q);
  if (!(sigma > 2.0)) throw PreconditionError("periodic_orbit: requires sigma > 2");
  if (!(omega > 1.0 && omega < sigma - 1.0)) {
    throw PreconditionError("periodic_orbit: requires 1 < p/q < sigma - 1");
  }
  const auto [lo, hi] = orbit_gap_box(omega, sigma);
  const double k_scale = std::max(1.0, std::abs(detail::h1_value(detail::pair_terms(ctx, 0.0, omega))));
  const detail::PeriodicDescent descent(ctx, p, q, lo, hi, k_scale);
  const double amp = 0.4 * std::min(omega - lo, hi - omega);

  std::vector<detail::DescentResult> results(static_cast<std::size_t>(starts));
  detail::parallel_for(results.size(), [&](std::size_t i) {
    auto rng = detail::seeded_engine(seed, i);
    std::vector<double> gaps(static_cast<std::size_t>(q));
    for (double& g : gaps) g = amp * (2.0 * detail::uniform01(rng) - 1.0);
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(q);
    std::vector<double> t(static_cast<std::size_t>(q));
    t[0] = detail::uniform01(rng);
    for (long n = 1; n < q; ++n) {
      t[static_cast<std::size_t>(n)] =
          t[static_cast<std::size_t>(n - 1)] + omega + gaps[static_cast<std::size_t>(n - 1)] - mean;
    }
    try {
      results[i] = descent.run(std::move(t));
    } catch (const DomainError&) {
      results[i] = {};
    }
  });

  const detail::DescentResult* best = nullptr;
  std::vector<double> best_norm;
  int converged = 0;
  double best_residual = kInf;
  for (const auto& r : results) {
    best_residual = std::min(best_residual, r.residual);
    if (!r.converged) continue;
    ++converged;
    auto norm = detail::normalize_orbit(r.times, p);
    bool take = best == nullptr;
    if (!take) {
      const double tol = 1e-10 * std::max(1.0, std::abs(best->action));
      if (r.action < best->action - tol) {
        take = true;
      } else if (std::abs(r.action - best->action) <= tol && norm.front() < best_norm.front()) {
        take = true;
      }
    }
    if (take) {
      best = &r;
      best_norm = std::move(norm);
    }
  }
  if (best == nullptr) {
    std::ostringstream msg;
    msg << "periodic_orbit: no start converged for (p, q) = (" << p << ", " << q
        << "); best residual " << best_residual << " over " << starts << " starts";
    throw ConvergenceError(msg.str());
  }

  MinimalOrbit out;
  out.p = p;
  out.q = q;
  out.times = std::move(best_norm);
  out.Ks.resize(out.times.size());
  out.monotone = true;
  for (long n = 0; n < q; ++n) {
    const double t0 = detail::time_at(out.times, p, n);
    const double t1 = detail::time_at(out.times, p, n + 1);
    out.Ks[static_cast<std::size_t>(n)] = detail::h1_value(detail::lifted_pair(ctx, t0, t1));
    if (!(t1 > t0)) out.monotone = false;
  }
  out.action = periodic_action(ctx, out.times, p);
  out.residual = el_residual(ctx, out.times, p);
  out.starts = starts;
  out.converged_starts = converged;
  out.seed = seed;
  out.gap_lo = lo;
  out.gap_hi = hi;
  return out;
}

// Continued-fraction convergents p/q of x with q <= cap.
inline std::vector<std::pair<long, long>> convergents(double x, long cap) {
  if (!(x > 0.0) || !std::isfinite(x)) throw PreconditionError("convergents: x must be positive");
  std::vector<std::pair<long, long>> out;
  long p_prev = 1, q_prev = 0;
  long p_cur = static_cast<long>(std::floor(x)), q_cur = 1;
  out.emplace_back(p_cur, q_cur);
  double rem = x - std::floor(x);
  for (int it = 0; it < 64 && rem > 1e-12; ++it) {
    const double inv = 1.0 / rem;
    const long a = static_cast<long>(std::floor(inv));
    rem = inv - static_cast<double>(a);
    const long p_next = a * p_cur + p_prev;
    const long q_next = a * q_cur + q_prev;
    if (q_next > cap) break;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    out.emplace_back(p_cur, q_cur);
  }
  return out;
}

// Hull functions sampled from the minimal orbit of the last admissible
// convergent of omega. Samples cover xi in [0, 2); the second period comes
// from q further map iterates, so phi(xi + 1) = phi(xi) + 1 is a real check.
inline HullSample hull_samples(const GenFunContext& ctx, double omega, long denom_cap,
                               int starts = 4, std::uint64_t seed = 0) {
  if (denom_cap < 1) throw PreconditionError("hull_samples: denominator cap must be positive");
  if (!(omega > 1.0 && omega < ctx.sigma - 1.0)) {
    throw PreconditionError("hull_samples: requires 1 < omega < sigma - 1");
  }
  std::optional<std::pair<long, long>> pick;
  for (const auto& pq : convergents(omega, denom_cap)) {
    const double w = static_cast<double>(pq.first) / static_cast<double>(pq.second);
    if (w > 1.0 && w < ctx.sigma - 1.0) pick = pq;
  }
  if (!pick) throw PreconditionError("hull_samples: no convergent inside (1, sigma - 1)");
  const auto [p, q] = *pick;
  const MinimalOrbit orb = periodic_orbit(ctx, p, q, starts, seed);
  const TwistMap map(ctx);

  std::vector<double> t(orb.times);
  std::vector<double> k(orb.Ks);
  CylinderState s{t.back(), k.back()};
  s = map.forward(s);
  for (long n = q; n < 2 * q; ++n) {
    t.push_back(s.t);
    k.push_back(s.K);
    if (n + 1 < 2 * q) s = map.forward(s);
  }

  struct Row {
    double xi, phi, eta;
  };
  std::vector<Row> rows;
  rows.reserve(t.size());
  for (long n = 0; n < 2 * q; ++n) {
    const long np = n * p;
    const long whole = np / q;
    const double xi = static_cast<double>(np % q) / static_cast<double>(q);
    // phi(xi_n) = t_n - floor(n p / q); the second period is placed at xi + 1
    const double lift = n < q ? 0.0 : 1.0;
    rows.push_back({xi + lift, t[static_cast<std::size_t>(n)] - static_cast<double>(whole) + lift,
                    k[static_cast<std::size_t>(n)]});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.xi < b.xi; });
  HullSample out;
  out.omega = omega;
  out.p = p;
  out.q = q;
  for (const auto& r : rows) {
    out.xs.push_back(r.xi);
    out.phi.push_back(r.phi);
    out.eta.push_back(r.eta);
  }
  return out;
}

inline void write_orbit_csv(std::ostream& os, const MinimalOrbit& orb) {
  const auto prec = os.precision(17);
  os << "n,t,K\n";
  for (std::size_t n = 0; n < orb.times.size(); ++n) {
    os << n << ',' << orb.times[n] << ',' << orb.Ks[n] << '\n';
  }
  os.precision(prec);
}

}  // namespace bbill
