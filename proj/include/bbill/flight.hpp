#pragma once

// Straight flight between two bounces on the moving circle, written in polar
// form: r(t) = sqrt((A^2 (t + B)^2 + c^2) / A), r^2 theta' = c.

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "bbill/error.hpp"
#include "bbill/radius.hpp"

namespace bbill {

struct FlightSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double c = 0.0;
  double A = 0.0;
  // t0 + B, kept separately so r(t) does not lose digits when t0 is large.
  double b_shift = 0.0;
  double theta0 = 0.0;
  double dtheta = 0.0;
  double ell_minus = 0.0;

  double tau() const { return t1 - t0; }
  double B() const { return b_shift - t0; }
  double energy() const { return 0.5 * A; }
};

struct WindowReport {
  bool angular = false;    // tau < eps r_min^2 / c
  bool velocity = false;   // tau < r_min / (2 |R'|)
  bool curvature = false;  // tau < 2 sqrt(1 + sqrt(1 - eps^2)) r_min / sqrt(|(R^2)''|)
  double angular_limit = kInf;
  double velocity_limit = kInf;
  double curvature_limit = kInf;

  bool ok() const { return angular && velocity && curvature; }
};

inline WindowReport validate_window(double t0, double t1, double c, const ProfileBounds& b) {
  if (!(t1 > t0)) throw DomainError("validate_window: requires t1 > t0");
  const double tau = t1 - t0;
  WindowReport w;
  w.angular_limit = c > 0.0 ? b.eps * b.r_min * b.r_min / c : kInf;
  w.velocity_limit = b.sigma_velocity;
  w.curvature_limit = b.sigma_curvature;
  w.angular = tau < w.angular_limit;
  w.velocity = tau < w.velocity_limit;
  w.curvature = tau < w.curvature_limit;
  return w;
}

inline WindowReport validate_window(double t0, double t1, double c, const RadiusProfile& p,
                                    double eps) {
  return validate_window(t0, t1, c, bounds(p, eps));
}

namespace detail {

// sqrt(R0^2 R1^2 - c^2 tau^2); throws when the chord cannot close.
inline double flight_discriminant(double r0, double r1, double c, double tau) {
  const double d = r0 * r0 * r1 * r1 - c * c * tau * tau;
  if (!(d > 0.0)) {
    throw DomainError("flight window violated: R0^2 R1^2 - c^2 tau^2 <= 0");
  }
  return std::sqrt(d);
}

inline FlightSegment make_segment(double t0, double tau, double c, double r0, double r1) {
  const double s = flight_discriminant(r0, r1, c, tau);
  FlightSegment seg;
  seg.t0 = t0;
  seg.t1 = t0 + tau;
  seg.c = c;
  seg.A = (r0 * r0 + r1 * r1 + 2.0 * s) / (tau * tau);
  seg.b_shift = -(r0 * r0 + s) / (tau * seg.A);
  seg.ell_minus = -(r0 * r0 + s) / tau;
  seg.dtheta = std::numbers::pi - std::atan(c * tau / s);
  return seg;
}

}  // namespace detail

inline FlightSegment flight_coeffs(double t0, double t1, double c, const RadiusProfile& p) {
  if (!(t1 > t0)) throw DomainError("flight_coeffs: requires t1 > t0");
  if (c < 0.0) throw PreconditionError("flight_coeffs: angular momentum must be non-negative");
  return detail::make_segment(t0, t1 - t0, c, p(t0), p(t1));
}

struct FlightState {
  double r = 0.0;
  double rdot = 0.0;
  double theta = 0.0;
};

inline FlightState flight_state(const FlightSegment& seg, double t) {
  if (t < seg.t0 || t > seg.t1) throw DomainError("flight_state: t outside [t0, t1]");
  const double w = (t - seg.t0) + seg.b_shift;
  const double aw = seg.A * w;
  FlightState st;
  st.r = std::sqrt((aw * w * seg.A + seg.c * seg.c) / seg.A);
  st.rdot = st.r > 0.0 ? aw / st.r : 0.0;
  // antiderivative of c / r^2 = c A / (A^2 w^2 + c^2) is atan(A w / c)
  if (seg.c > 0.0) {
    st.theta = seg.theta0 + std::atan(aw / seg.c) - std::atan(seg.A * seg.b_shift / seg.c);
  } else {
    // diametral flight: the angle flips by pi when passing through the centre
    st.theta = seg.theta0 + (w > 0.0 ? std::numbers::pi : (w == 0.0 ? 0.5 * std::numbers::pi : 0.0));
  }
  return st;
}

inline double angular_advance(double t0, double t1, double c, const RadiusProfile& p) {
  return flight_coeffs(t0, t1, c, p).dtheta;
}

// max over interior samples of r(t)^2 - R(t)^2; negative when the flight stays
// strictly inside the moving disk.
inline double interior_margin(const FlightSegment& seg, const RadiusProfile& p, int samples = 128) {
  if (samples < 1) throw PreconditionError("interior_margin: need at least one sample");
  double worst = -kInf;
  const double tau = seg.tau();
  for (int i = 1; i <= samples; ++i) {
    const double off = tau * i / (samples + 1);
    const double r = flight_state(seg, seg.t0 + off).r;
    const double big_r = p(seg.t0 + off);
    worst = std::max(worst, r * r - big_r * big_r);
  }
  return worst;
}

struct SegmentSample {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double x = 0.0;
  double y = 0.0;
};

// Samples at t0, t0 + dt, ... and always the endpoint t1.
inline std::vector<SegmentSample> sample_segment(const FlightSegment& seg, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("sample_segment: dt must be positive");
  std::vector<SegmentSample> out;
  const auto push = [&](double t) {
    const auto st = flight_state(seg, t);
    out.push_back({t, st.r, st.theta, st.r * std::cos(st.theta), st.r * std::sin(st.theta)});
  };
  const double tau = seg.tau();
  const auto n = static_cast<long>(std::floor(tau / dt));
  for (long i = 0; i <= n; ++i) {
    const double off = static_cast<double>(i) * dt;
    if (off >= tau) break;
    push(seg.t0 + off);
  }
  push(seg.t1);
  return out;
}

inline void write_segment_csv(std::ostream& os, const FlightSegment& seg, double dt) {
  const auto prec = os.precision(17);
  os << "t,r,theta,x,y\n";
  for (const auto& s : sample_segment(seg, dt)) {
    os << s.t << ',' << s.r << ',' << s.theta << ',' << s.x << ',' << s.y << '\n';
  }
  os.precision(prec);
}

}  // namespace bbill
