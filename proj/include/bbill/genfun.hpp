#pragma once

// Generating function of the reduced billiard map,
//   h(t0, t1) = tau A(t0, t1) / 2 + c atan(c tau / sqrt(R0^2 R1^2 - c^2 tau^2)),
// the Lagrangian action of the flight between consecutive bounces, with its
// first and second partial derivatives in closed form.
//
// Every function has a (t0, tau) twin; the map and orbit code work with gaps
// so that R(t0 + tau) keeps full precision when t0 is a large lift.

#include <cmath>
#include <optional>
#include <string>

#include "bbill/error.hpp"
#include "bbill/flight.hpp"
#include "bbill/radius.hpp"

namespace bbill {

struct GenFunContext {
  RadiusProfile profile;
  double c = 0.0;
  double eps = 0.5;
  ProfileBounds bounds;
  double sigma = kInf;  // strip width: bounds.sigma or a caller-chosen working value
};

// c must lie in [0, eps r_min^2 / sigma). Constant profiles have sigma = inf;
// pass a finite working sigma for them.
inline GenFunContext make_context(const RadiusProfile& p, double eps, double c,
                                  std::optional<double> working_sigma = std::nullopt,
                                  int grid_n = 4096) {
  GenFunContext ctx;
  ctx.profile = p;
  ctx.c = c;
  ctx.eps = eps;
  ctx.bounds = bounds(p, eps, grid_n);
  ctx.sigma = working_sigma.value_or(ctx.bounds.sigma);
  if (!(ctx.sigma > 0.0)) throw PreconditionError("generating function: sigma must be positive");
  if (c < 0.0) throw PreconditionError("generating function: c must be non-negative");
  if (std::isfinite(ctx.sigma) && !(c < eps * ctx.bounds.r_min * ctx.bounds.r_min / ctx.sigma)) {
    throw PreconditionError("generating function: c must be below eps r_min^2 / sigma");
  }
  return ctx;
}

namespace detail {

// Radii, their derivatives and the chord discriminant for one flight.
struct PairTerms {
  double tau;
  double r0, dr0, ddr0;
  double r1, dr1, ddr1;
  double s;  // sqrt(R0^2 R1^2 - c^2 tau^2)
  double c;
};

inline PairTerms pair_terms(const GenFunContext& ctx, double t0, double tau, bool check_strip = true) {
  if (check_strip && !(tau > 0.0 && tau < ctx.sigma)) {
    throw DomainError("generating function: (t0, t1) outside the strip 0 < t1 - t0 < sigma");
  }
  const auto j0 = ctx.profile.eval(t0);
  const double u0 = t0 - std::floor(t0);
  const auto j1 = ctx.profile.eval(u0 + tau);
  PairTerms p{tau, j0.r, j0.dr, j0.ddr, j1.r, j1.dr, j1.ddr, 0.0, ctx.c};
  p.s = flight_discriminant(p.r0, p.r1, ctx.c, tau);
  return p;
}

inline double a_coeff(const PairTerms& p) {
  return (p.r0 * p.r0 + p.r1 * p.r1 + 2.0 * p.s) / (p.tau * p.tau);
}

// X = -rdot(t0+), Y = rdot(t1-)
inline double outgoing_speed(const PairTerms& p) { return (p.r0 * p.r0 + p.s) / (p.r0 * p.tau); }
inline double incoming_speed(const PairTerms& p) { return (p.r1 * p.r1 + p.s) / (p.r1 * p.tau); }

inline double h_value(const PairTerms& p) {
  return 0.5 * p.tau * a_coeff(p) + p.c * std::atan(p.c * p.tau / p.s);
}

inline double h1_value(const PairTerms& p) {
  const double x = outgoing_speed(p);
  return p.c * p.c / (2.0 * p.r0 * p.r0) + 0.5 * x * x + p.dr0 * x;
}

inline double h2_value(const PairTerms& p) {
  const double y = incoming_speed(p);
  return -0.5 * y * y - p.c * p.c / (2.0 * p.r1 * p.r1) + p.dr1 * y;
}

inline double h11_value(const PairTerms& p) {
  const double tau = p.tau;
  const double c2 = p.c * p.c;
  return p.ddr0 * (p.r0 * p.r0 + p.s) / (p.r0 * tau) +
         p.dr0 * p.dr0 / tau * (1.0 + c2 * tau * tau / (p.r0 * p.r0 * p.s)) +
         2.0 * p.r0 * p.dr0 / (tau * tau) * (1.0 + p.r1 * p.r1 / p.s) + a_coeff(p) / tau +
         c2 / (tau * p.s);
}

inline double h22_value(const PairTerms& p) {
  const double tau = p.tau;
  const double c2 = p.c * p.c;
  return p.ddr1 * (p.r1 * p.r1 + p.s) / (p.r1 * tau) +
         p.dr1 * p.dr1 / tau * (1.0 + c2 * tau * tau / (p.r1 * p.r1 * p.s)) -
         2.0 * p.r1 * p.dr1 / (tau * tau) * (1.0 + p.r0 * p.r0 / p.s) + a_coeff(p) / tau +
         c2 / (tau * p.s);
}

// (X + R'(t0)) * dX/dt1
inline double h12_value(const PairTerms& p) {
  const double x = outgoing_speed(p);
  const double dx = p.r0 * (p.r1 * p.dr1 * p.tau - p.s - p.r1 * p.r1) / (p.tau * p.tau * p.s);
  return (x + p.dr0) * dx;
}

}  // namespace detail

struct Gradient {
  double d1 = 0.0;
  double d2 = 0.0;
};

struct Hessian {
  double d11 = 0.0;
  double d12 = 0.0;
  double d22 = 0.0;
};

inline double h_gap(const GenFunContext& ctx, double t0, double tau) {
  return detail::h_value(detail::pair_terms(ctx, t0, tau));
}

inline Gradient grad_h_gap(const GenFunContext& ctx, double t0, double tau) {
  const auto p = detail::pair_terms(ctx, t0, tau);
  return {detail::h1_value(p), detail::h2_value(p)};
}

inline Hessian hess_h_gap(const GenFunContext& ctx, double t0, double tau) {
  const auto p = detail::pair_terms(ctx, t0, tau);
  return {detail::h11_value(p), detail::h12_value(p), detail::h22_value(p)};
}

inline double h(const GenFunContext& ctx, double t0, double t1) { return h_gap(ctx, t0, t1 - t0); }

inline Gradient grad_h(const GenFunContext& ctx, double t0, double t1) {
  return grad_h_gap(ctx, t0, t1 - t0);
}

inline Hessian hess_h(const GenFunContext& ctx, double t0, double t1) {
  return hess_h_gap(ctx, t0, t1 - t0);
}

inline FlightSegment flight_of(const GenFunContext& ctx, double t0, double tau) {
  const auto p = detail::pair_terms(ctx, t0, tau);
  return detail::make_segment(t0, tau, ctx.c, p.r0, p.r1);
}

}  // namespace bbill
