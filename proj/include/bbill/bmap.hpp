#pragma once

// The reduced billiard map P(t0, K0) = (t1, K1), defined implicitly by
//   K0 = d1 h(t0, t1),   K1 = -d2 h(t0, t1)
// on T x (sigma_*, inf). Times are real lifts; P commutes with t -> t + 1.

#include <cmath>
#include <limits>
#include <utility>

#include "bbill/detail/numeric.hpp"
#include "bbill/error.hpp"
#include "bbill/genfun.hpp"

namespace bbill {

struct CylinderState {
  double t = 0.0;
  double K = 0.0;

  double phase() const { return t - std::floor(t); }
};

struct MapJacobian {
  double dt1_dt0 = 0.0;
  double dt1_dK0 = 0.0;
  double dK1_dt0 = 0.0;
  double dK1_dK0 = 0.0;

  double det() const { return dt1_dt0 * dK1_dK0 - dt1_dK0 * dK1_dt0; }
};

// max over t of d1 h(t, t + sigma): lower edge of the map domain.
inline double sigma_star(const GenFunContext& ctx, int grid_n = 512) {
  if (!std::isfinite(ctx.sigma)) {
    throw PreconditionError("sigma_star: a finite sigma is required (choose a working sigma)");
  }
  auto f = [&](double t) {
    return detail::h1_value(detail::pair_terms(ctx, t, ctx.sigma, false));
  };
  if (ctx.profile.is_constant()) return f(0.0);
  return detail::periodic_max(f, grid_n).second;
}

class TwistMap {
 public:
  explicit TwistMap(GenFunContext ctx) : ctx_(std::move(ctx)), sigma_star_(bbill::sigma_star(ctx_)) {}

  const GenFunContext& context() const { return ctx_; }
  double sigma() const { return ctx_.sigma; }
  double sigma_star() const { return sigma_star_; }

  bool in_domain(const CylinderState& s) const { return s.K > sigma_star_; }

  // Gap tau = t1 - t0 of the flight leaving (t0, K0).
  double forward_gap(const CylinderState& s) const {
    if (!(s.K > sigma_star_)) {
      throw DomainError("forward: K0 <= sigma_* (outside the map domain)");
    }
    return solve_gap(s.t, s.K, /*leaving=*/true);
  }

  CylinderState forward(const CylinderState& s) const {
    const double tau = forward_gap(s);
    const auto p = detail::pair_terms(ctx_, s.t, tau);
    return {s.t + tau, -detail::h2_value(p)};
  }

  // Inverse of forward: the bounce (t0, K0) whose image is s.
  CylinderState backward(const CylinderState& s) const {
    const double tau = solve_gap(s.t, s.K, /*leaving=*/false);
    const double t0 = s.t - tau;
    const auto p = detail::pair_terms(ctx_, t0, tau);
    return {t0, detail::h1_value(p)};
  }

  // Radial velocity right after (plus) and right before (minus) the bounce.
  std::pair<double, double> radial_velocity(const CylinderState& s) const {
    const double tau = forward_gap(s);
    const auto p = detail::pair_terms(ctx_, s.t, tau);
    const double plus = -detail::outgoing_speed(p);
    return {plus, -plus + 2.0 * p.dr0};
  }

  MapJacobian jacobian(const CylinderState& s) const {
    const double tau = forward_gap(s);
    return jacobian_at(detail::pair_terms(ctx_, s.t, tau));
  }

  static MapJacobian jacobian_at(const detail::PairTerms& p) {
    const double h11 = detail::h11_value(p);
    const double h12 = detail::h12_value(p);
    const double h22 = detail::h22_value(p);
    MapJacobian j;
    j.dt1_dK0 = 1.0 / h12;
    j.dt1_dt0 = -h11 / h12;
    j.dK1_dK0 = -h22 / h12;
    j.dK1_dt0 = -h12 - h22 * j.dt1_dt0;
    return j;
  }

  // One step returning the image and the Jacobian at s together.
  std::pair<CylinderState, MapJacobian> step_with_jacobian(const CylinderState& s) const {
    const double tau = forward_gap(s);
    const auto p = detail::pair_terms(ctx_, s.t, tau);
    return {{s.t + tau, -detail::h2_value(p)}, jacobian_at(p)};
  }

  // Map in the variables (t, I), I = -R(t) rdot(t+), solved directly from its
  // own two equations (chord closure and momentum update) without touching h.
  std::pair<double, double> laederich_map(double t0, double i0) const {
    const double c = ctx_.c;
    const auto j0 = ctx_.profile.eval(t0);
    const double a0 = (c * c + i0 * i0) / (j0.r * j0.r);
    const double u0 = t0 - std::floor(t0);
    auto closure = [&](double tau) {
      const double r1 = ctx_.profile.eval(u0 + tau).r;
      return tau * (a0 * tau - 2.0 * i0) - (r1 * r1 - j0.r * j0.r);
    };
    // g(0) = 0 and g'(0) < 0: scan for the first sign change to the right
    constexpr int kScan = 256;
    const double hi_lim = std::isfinite(ctx_.sigma) ? ctx_.sigma : 1e6;
    double lo = 0.0;
    double hi = -1.0;
    double prev = 0.0;
    for (int i = 1; i <= kScan; ++i) {
      const double x = hi_lim * i / kScan;
      const double g = closure(x);
      if (g > 0.0 && (i == 1 || prev <= 0.0)) {
        lo = hi_lim * (i - 1) / kScan;
        hi = x;
        break;
      }
      prev = g;
    }
    if (hi < 0.0) throw DomainError("laederich_map: chord does not close inside the strip");
    if (lo == 0.0) {
      // skip the trivial root at tau = 0
      lo = hi;
      while (closure(lo) > 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) throw DomainError("laederich_map: no interior chord root");
      }
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (closure(mid) > 0.0 ? hi : lo) = mid;
    }
    const double tau = 0.5 * (lo + hi);
    const auto j1 = ctx_.profile.eval(u0 + tau);
    const double i1 = -i0 - 2.0 * j1.r * j1.dr + a0 * tau;
    return {t0 + tau, i1};
  }

 private:
  // leaving: find tau with d1 h(t, t + tau) = K (image of the bounce at t)
  // arriving: find tau with -d2 h(t - tau, t) = K (preimage of the bounce at t)
  // Both functions of tau decrease strictly from +inf, by d12 h < 0.
  double solve_gap(double t, double K, bool leaving) const {
    const double sigma = ctx_.sigma;
    if (!std::isfinite(sigma)) throw PreconditionError("billiard map: finite sigma required");
    auto f = [&](double tau) {
      if (leaving) return detail::h1_value(detail::pair_terms(ctx_, t, tau, false)) - K;
      return -detail::h2_value(detail::pair_terms(ctx_, t - tau, tau, false)) - K;
    };
    auto df = [&](double tau) {
      if (leaving) return detail::h12_value(detail::pair_terms(ctx_, t, tau, false));
      // d/dtau of -d2 h(t - tau, t) = d12 h
      return detail::h12_value(detail::pair_terms(ctx_, t - tau, tau, false));
    };
    const double lo = 1e-9 * std::max(1.0, sigma);
    const double hi = sigma * (1.0 - 1e-12);
    if (!(f(hi) < 0.0)) {
      throw DomainError(leaving ? "forward: no flight inside the strip (window exhausted)"
                                : "backward: no flight inside the strip (window exhausted)");
    }
    // diametral estimate tau = 2 R / sqrt(2 K) as the first Newton iterate
    const double guess = K > 0.0 ? 2.0 * ctx_.profile(t) / std::sqrt(2.0 * K) : 0.5 * (lo + hi);
    const auto root = detail::safeguarded_root(f, df, lo, hi, 1e-15 * std::abs(K), guess);
    return root.x;
  }

  GenFunContext ctx_;
  double sigma_star_ = 0.0;
};

}  // namespace bbill
