#pragma once

// Non-existence of invariant curves for rotation numbers in a window, read off
// from the sign of a_c = h11(t, t1) + h22(t_{-1}, t) at a deceleration point,
// plus Lyapunov exponents as numerical evidence of chaos.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbill/bmap.hpp"
#include "bbill/detail/numeric.hpp"
#include "bbill/error.hpp"
#include "bbill/genfun.hpp"
#include "bbill/radius.hpp"

namespace bbill {

struct KBand {
  double omega = 0.0;
  double k_lo = 0.0;
  double k_hi = 0.0;
};

struct OmegaWindow {
  double lo = 0.0;
  double hi = 0.0;
  double t_bar = 0.0;
  double ddr_bar = 0.0;

  double width() const { return hi - lo; }
  bool contains(double w) const { return w > lo && w < hi; }
};

namespace detail {

// Witness with the strongest deceleration among those that qualify.
inline StationaryPoint pick_witness(const ClassVerdict& v) {
  if (v.cls != ProfileClass::R_tilde || v.witnesses.empty()) {
    throw PreconditionError("profile is not in class R_tilde");
  }
  return *std::max_element(v.witnesses.begin(), v.witnesses.end(),
                           [](const auto& a, const auto& b) { return std::abs(a.ddr) < std::abs(b.ddr); });
}

inline OmegaWindow window_from(const ProfileBounds& b, const StationaryPoint& w) {
  const auto terms = witness_terms(b, w.ddr);
  OmegaWindow out;
  out.lo = std::max(terms.lhs, 3.0);
  out.hi = std::min(terms.rhs, b.sigma - 1.0);
  out.t_bar = w.t;
  out.ddr_bar = w.ddr;
  if (!(out.hi > out.lo)) throw PreconditionError("xi_interval: rotation-number window is empty");
  return out;
}

// Band formulas without the window check; valid for any omega > 1.
inline KBand k_band_raw(const ProfileBounds& b, double omega) {
  KBand k;
  k.omega = omega;
  k.k_lo = 2.0 * b.r_min * b.r_min / ((omega + 1.0) * (omega + 1.0)) -
           2.0 * b.dr_norm * b.r_max / (omega + 1.0);
  k.k_hi = 2.0 * b.r_max * b.r_max / ((omega - 1.0) * (omega - 1.0)) +
           2.0 * b.dr_norm * b.r_max / (omega - 1.0);
  return k;
}

}  // namespace detail

inline OmegaWindow xi_interval(const RadiusProfile& p, double eps, int grid_n = 4096) {
  const auto v = classify(p, eps, grid_n);
  return detail::window_from(v.bounds, detail::pick_witness(v));
}

inline KBand k_band(const RadiusProfile& p, double eps, double omega, int grid_n = 4096) {
  const auto v = classify(p, eps, grid_n);
  const auto win = detail::window_from(v.bounds, detail::pick_witness(v));
  if (!win.contains(omega)) throw DomainError("k_band: omega outside the rotation-number window");
  return detail::k_band_raw(v.bounds, omega);
}

// h11(t, t1) + h22(t_{-1}, t) with t1, t_{-1} the forward and backward
// bounces of (t, K).
inline double a_exact(const TwistMap& map, double t_bar, double K) {
  const CylinderState s{t_bar, K};
  const double tau_f = map.forward_gap(s);
  const double tau_b = t_bar - map.backward(s).t;
  const auto& ctx = map.context();
  return detail::h11_value(detail::pair_terms(ctx, t_bar, tau_f)) +
         detail::h22_value(detail::pair_terms(ctx, t_bar - tau_b, tau_b));
}

inline double a_exact(const GenFunContext& ctx, double t_bar, double K) {
  return a_exact(TwistMap(ctx), t_bar, K);
}

struct AlphaLimit {
  double limit = 0.0;        // neighbour-radii form
  double upper_bound = 0.0;  // 2 sqrt(2K) (R'' + K / r_min)
  double t_prev = 0.0;
  double t_next = 0.0;
};

// c -> 0 limit of a_c at a stationary point. The neighbour bounces solve
// tau = (R(t) + R(t +- tau)) / sqrt(2K) (diametral flights at speed sqrt(2K)).
inline AlphaLimit alpha_limit(const RadiusProfile& p, double r_min, double t_bar, double K) {
  if (!(K > 0.0)) throw PreconditionError("alpha_limit: K must be positive");
  const auto j = p.eval(t_bar);
  if (std::abs(j.dr) > 1e-10 * std::max(1.0, j.r)) {
    throw PreconditionError("alpha_limit: R'(t_bar) must vanish");
  }
  const double speed = std::sqrt(2.0 * K);
  double tf = 2.0 * j.r / speed;
  double tb = tf;
  for (int it = 0; it < 200; ++it) {
    const double nf = (j.r + p(t_bar + tf)) / speed;
    const double nb = (j.r + p(t_bar - tb)) / speed;
    const bool done = std::abs(nf - tf) <= 1e-15 * nf && std::abs(nb - tb) <= 1e-15 * nb;
    tf = nf;
    tb = nb;
    if (done) break;
  }
  const double r_next = p(t_bar + tf);
  const double r_prev = p(t_bar - tb);
  AlphaLimit out;
  out.limit = 2.0 * speed * (j.ddr + K * (1.0 / (r_prev + j.r) + 1.0 / (r_next + j.r)));
  out.upper_bound = 2.0 * speed * (j.ddr + K / r_min);
  out.t_prev = t_bar - tb;
  out.t_next = t_bar + tf;
  return out;
}

inline AlphaLimit alpha_limit(const RadiusProfile& p, double t_bar, double K) {
  return alpha_limit(p, bounds(p, 0.5).r_min, t_bar, K);
}

struct CertifyOptions {
  int omega_grid = 33;
  int k_samples = 257;
  int grid_n = 4096;
};

struct ASample {
  double K = 0.0;
  double a = 0.0;
  double alpha = 0.0;
};

struct ChaosCertificate {
  RadiusProfile profile;
  double eps = 0.5;
  double c = 0.0;
  std::string profile_class = "none";
  bool certified = false;
  std::string reason;
  double t_bar = 0.0;
  double ddr_bar = 0.0;
  double sigma = kInf;
  double sigma_star = 0.0;
  OmegaWindow window;
  std::vector<KBand> bands;
  double chain_margin = 0.0;  // min over the grid of the three band-chain slacks
  double k_union_lo = 0.0;
  double k_union_hi = 0.0;
  double c2f_bound = 0.0;  // bound on the c^2 f shift of the band
  double k_lo = 0.0;       // sampled K range after widening
  double k_hi = 0.0;
  std::vector<ASample> a_grid;
  double a_max = kInf;
  double alpha_gap = 0.0;  // max |a_exact - alpha| on the samples
  double margin = 0.0;     // 2 alpha_gap
  CertifyOptions options;
};

inline ChaosCertificate certify(const RadiusProfile& p, double eps, double c,
                                const CertifyOptions& opt = {}) {
  if (opt.omega_grid < 2 || opt.k_samples < 2) {
    throw PreconditionError("certify: grids need at least two points");
  }
  ChaosCertificate cert;
  cert.profile = p;
  cert.eps = eps;
  cert.c = c;
  cert.options = opt;
  const auto v = classify(p, eps, opt.grid_n);
  const auto& b = v.bounds;
  cert.profile_class = to_string(v.cls);
  cert.sigma = b.sigma;
  if (v.cls != ProfileClass::R_tilde) {
    cert.reason = std::string("profile class is ") + to_string(v.cls) + ", not R_tilde";
    return cert;
  }
  const double c_max = eps * b.r_min * b.r_min / b.sigma;
  if (!(c > 0.0 && c < c_max)) {
    cert.reason = "c outside (0, eps r_min^2 / sigma)";
    return cert;
  }
  const auto witness = detail::pick_witness(v);
  cert.t_bar = witness.t;
  cert.ddr_bar = witness.ddr;
  try {
    cert.window = detail::window_from(b, witness);
  } catch (const PreconditionError& e) {
    cert.reason = e.what();
    return cert;
  }

  const double floor_k = 2.0 * b.r_max * b.r_max / (b.sigma * b.sigma);
  const double ceil_k = -witness.ddr * b.r_min;
  cert.chain_margin = kInf;
  cert.k_union_lo = kInf;
  cert.k_union_hi = -kInf;
  for (int i = 0; i < opt.omega_grid; ++i) {
    const double w = cert.window.lo + cert.window.width() * i / (opt.omega_grid - 1);
    const auto band = detail::k_band_raw(b, w);
    cert.bands.push_back(band);
    cert.chain_margin = std::min({cert.chain_margin, band.k_lo - floor_k, band.k_hi - band.k_lo,
                                  ceil_k - band.k_hi});
    cert.k_union_lo = std::min(cert.k_union_lo, band.k_lo);
    cert.k_union_hi = std::max(cert.k_union_hi, band.k_hi);
  }

  // K_0 + c^2 f lies in the band with 0 < f <= 1/(2 r_min) + (r_max + |R'| tau) / r_min^3;
  // the band for K_0 itself therefore extends below by at most c^2 f.
  const double tau_max = cert.window.hi + 1.0;
  const double f_bound = 1.0 / (2.0 * b.r_min) +
                         (b.r_max + b.dr_norm * tau_max) / (b.r_min * b.r_min * b.r_min);
  cert.c2f_bound = c * c * f_bound;
  cert.k_lo = cert.k_union_lo - 2.0 * cert.c2f_bound;
  cert.k_hi = cert.k_union_hi;

  const auto ctx = make_context(p, eps, c, std::nullopt, opt.grid_n);
  const TwistMap map(ctx);
  cert.sigma_star = map.sigma_star();
  if (!(cert.k_lo > cert.sigma_star)) {
    cert.reason = "widened K range reaches below sigma_*";
    return cert;
  }

  cert.a_grid.resize(static_cast<std::size_t>(opt.k_samples));
  std::vector<std::string> failures(cert.a_grid.size());
  detail::parallel_for(cert.a_grid.size(), [&](std::size_t i) {
    const double K = cert.k_lo + (cert.k_hi - cert.k_lo) * static_cast<double>(i) /
                                     static_cast<double>(opt.k_samples - 1);
    auto& s = cert.a_grid[i];
    s.K = K;
    try {
      s.a = a_exact(map, cert.t_bar, K);
      s.alpha = alpha_limit(p, b.r_min, cert.t_bar, K).limit;
    } catch (const Error& e) {
      s.a = std::numeric_limits<double>::quiet_NaN();
      s.alpha = std::numeric_limits<double>::quiet_NaN();
      failures[i] = e.what();
    }
  });
  cert.a_max = -kInf;
  for (std::size_t i = 0; i < cert.a_grid.size(); ++i) {
    if (!failures[i].empty()) {
      cert.a_max = std::numeric_limits<double>::quiet_NaN();
      cert.reason = "a_c undefined at K = " + std::to_string(cert.a_grid[i].K) + ": " + failures[i];
      return cert;
    }
    cert.a_max = std::max(cert.a_max, cert.a_grid[i].a);
    cert.alpha_gap = std::max(cert.alpha_gap, std::abs(cert.a_grid[i].a - cert.a_grid[i].alpha));
  }
  cert.margin = 2.0 * cert.alpha_gap;
  if (!(cert.chain_margin > 0.0)) {
    cert.reason = "band chain fails on the omega grid";
  } else if (!(cert.a_max < 0.0)) {
    cert.reason = "a_c is not negative on the whole band";
  } else if (!(cert.a_max + cert.margin < 0.0)) {
    cert.reason = "a_c negative but within the alpha-gap margin of zero";
  } else {
    cert.certified = true;
    cert.reason = "a_c < 0 on the widened band";
  }
  return cert;
}

struct C0Result {
  bool found = false;
  double c0 = 0.0;
  double c_max = 0.0;
  int iterations = 0;
  int certify_calls = 0;
  bool half_certified = false;     // spot check at c0 / 2
  bool quarter_certified = false;  // spot check at c0 / 4
  double a_max_at_c0 = 0.0;
  std::string diagnostics;
};

// Largest certified c found by bisection on (0, eps r_min^2 / sigma),
// assuming (not proving) that the verdict is monotone in c.
inline C0Result c0_search(const RadiusProfile& p, double eps, const CertifyOptions& opt = {},
                          int iterations = 20) {
  const auto v = classify(p, eps, opt.grid_n);
  if (v.cls != ProfileClass::R_tilde) throw PreconditionError("c0_search: profile is not in class R_tilde");
  C0Result out;
  out.c_max = eps * v.bounds.r_min * v.bounds.r_min / v.bounds.sigma;
  auto ok = [&](double c) {
    ++out.certify_calls;
    return certify(p, eps, c, opt).certified;
  };
  double hi = out.c_max * (1.0 - 1e-9);
  double lo = 0.0;
  if (ok(hi)) {
    lo = hi;
  } else {
    double c = 0.5 * out.c_max;
    for (int k = 0; k < 60; ++k, c *= 0.5) {
      if (ok(c)) {
        lo = c;
        break;
      }
      hi = c;
    }
    if (lo == 0.0) {
      out.diagnostics = "no certified c found down to c_max * 2^-60";
      return out;
    }
    for (int it = 0; it < iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
      ++out.iterations;
    }
  }
  out.found = true;
  out.c0 = lo;
  const auto at_c0 = certify(p, eps, lo, opt);
  out.a_max_at_c0 = at_c0.a_max;
  out.half_certified = ok(0.5 * lo);
  out.quarter_certified = ok(0.25 * lo);
  out.diagnostics = (out.half_certified && out.quarter_certified)
                        ? "verdict certified at c0, c0/2 and c0/4"
                        : "verdict not monotone in c: spot check below c0 failed";
  return out;
}

struct LyapunovResult {
  double lambda = 0.0;
  long steps = 0;
  bool truncated = false;
  std::string reason;
  std::vector<double> log_norms;  // per-step growth, kept on request
};

// Largest Lyapunov exponent from the tangent map with per-step renormalization.
inline LyapunovResult lyapunov(const TwistMap& map, CylinderState s, long n, bool keep_norms = false,
                               std::pair<double, double> v0 = {1.0, 0.0}) {
  if (n < 1) throw PreconditionError("lyapunov: need at least one step");
  if (!map.in_domain(s)) throw DomainError("lyapunov: initial state outside the map domain");
  LyapunovResult out;
  double vx = v0.first;
  double vy = v0.second;
  const double n0 = std::hypot(vx, vy);
  if (!(n0 > 0.0)) throw PreconditionError("lyapunov: tangent vector must be non-zero");
  vx /= n0;
  vy /= n0;
  double sum = 0.0;
  if (keep_norms) out.log_norms.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    std::pair<CylinderState, MapJacobian> step;
    try {
      step = map.step_with_jacobian(s);
    } catch (const DomainError& e) {
      out.truncated = true;
      out.reason = e.what();
      break;
    }
    const auto& j = step.second;
    const double wx = j.dt1_dt0 * vx + j.dt1_dK0 * vy;
    const double wy = j.dK1_dt0 * vx + j.dK1_dK0 * vy;
    const double nrm = std::hypot(wx, wy);
    const double ln = std::log(nrm);
    sum += ln;
    if (keep_norms) out.log_norms.push_back(ln);
    vx = wx / nrm;
    vy = wy / nrm;
    s = step.first;
    s.t -= std::floor(s.t);
    ++out.steps;
    if (!map.in_domain(s)) {
      out.truncated = true;
      out.reason = "orbit left the map domain (K <= sigma_*)";
      break;
    }
  }
  out.lambda = out.steps > 0 ? sum / static_cast<double>(out.steps) : 0.0;
  return out;
}

}  // namespace bbill
