#pragma once

// Reference profiles and independent numerical oracles shared by the tests.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

#include "bbill/bbill.hpp"

namespace bbill::testing {

// Moderate breathing profile: sigma ~ 3.33, every closed form well conditioned.
inline RadiusProfile breathing() { return RadiusProfile(1.0, {{1, 0.004}, {3, 0.0005}}); }

inline GenFunContext breathing_ctx(double c = 0.1) { return make_context(breathing(), 0.5, c); }

// Static unit circle with a working strip width.
inline GenFunContext static_ctx(double c = 0.0, double sigma = 5.0, double mean = 1.0) {
  return make_context(RadiusProfile::constant(mean), 0.5, c, sigma);
}

// The single-harmonic member used for the chaos certificate.
inline const MemberResult& certified_member() {
  static const MemberResult m = find_member(1, 0.05, 0.5, sufficient_mean_bound(1, 0.05));
  return m;
}

// Central difference of order 4.
template <typename F>
double fd(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

// Action of a flight by adaptive quadrature of the reduced Lagrangian
// rdot^2 / 2 - c^2 / (2 r^2), shifted by the constant c pi.
inline double action_by_quadrature(const FlightSegment& seg) {
  auto lagr = [&](double t) {
    const auto st = flight_state(seg, t);
    return 0.5 * st.rdot * st.rdot - seg.c * seg.c / (2.0 * st.r * st.r);
  };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      lagr, seg.t0, seg.t1, 20, 1e-14, &err);
  return v + seg.c * std::numbers::pi;
}

// Swept angle by quadrature of c / r^2.
inline double angle_by_quadrature(const FlightSegment& seg) {
  auto f = [&](double t) {
    const auto st = flight_state(seg, t);
    return seg.c / (st.r * st.r);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, seg.t0, seg.t1, 20, 1e-14);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * detail::uniform01(rng);
}

}  // namespace bbill::testing
