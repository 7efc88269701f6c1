#pragma once

// Boundary radius R(t) of the breathing circle: a 1-periodic trigonometric
// polynomial M + sum_i d_i sin(2 pi k_i t), its sup-norms, the flight-window
// length sigma, and the regularity classes used by the twist-map machinery.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bbill/detail/numeric.hpp"
#include "bbill/error.hpp"

namespace bbill {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Harmonic {
  int k = 1;
  double amplitude = 0.0;
};

struct RadiusJet {
  double r = 0.0;
  double dr = 0.0;
  double ddr = 0.0;
};

class RadiusProfile {
 public:
  RadiusProfile() = default;

  RadiusProfile(double mean, std::vector<Harmonic> harmonics)
      : mean_(mean), harmonics_(std::move(harmonics)) {
    if (!(mean_ > 0.0) || !std::isfinite(mean_)) {
      throw PreconditionError("radius profile: mean must be positive and finite");
    }
    double total = 0.0;
    for (const auto& h : harmonics_) {
      if (h.k <= 0) throw PreconditionError("radius profile: harmonic frequency must be positive");
      if (!std::isfinite(h.amplitude)) throw PreconditionError("radius profile: non-finite amplitude");
      total += std::abs(h.amplitude);
    }
    if (!(mean_ > total)) {
      throw PreconditionError("radius profile: mean must exceed the sum of |amplitudes| (R > 0)");
    }
  }

  static RadiusProfile constant(double mean) { return RadiusProfile(mean, {}); }

  double mean() const { return mean_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }

  bool is_constant() const {
    return std::all_of(harmonics_.begin(), harmonics_.end(),
                       [](const Harmonic& h) { return h.amplitude == 0.0; });
  }

  // Argument reduced to [0, 1) so that eval(t + 1) == eval(t) up to the
  // rounding of t itself.
  RadiusJet eval(double t) const {
    const double u = t - std::floor(t);
    RadiusJet j{mean_, 0.0, 0.0};
    for (const auto& h : harmonics_) {
      const double w = detail::kTwoPi * h.k;
      const double s = std::sin(w * u);
      const double c = std::cos(w * u);
      j.r += h.amplitude * s;
      j.dr += h.amplitude * w * c;
      j.ddr -= h.amplitude * w * w * s;
    }
    return j;
  }

  double operator()(double t) const { return eval(t).r; }

  // Human-readable literal, e.g. "9000 + 0.05*sin(2*pi*1*t)".
  std::string literal() const {
    std::ostringstream os;
    os.precision(17);
    os << mean_;
    for (const auto& h : harmonics_) {
      os << (h.amplitude < 0 ? " - " : " + ") << std::abs(h.amplitude) << "*sin(2*pi*" << h.k
         << "*t)";
    }
    return os.str();
  }

  friend bool operator==(const RadiusProfile& a, const RadiusProfile& b) {
    if (a.mean_ != b.mean_ || a.harmonics_.size() != b.harmonics_.size()) return false;
    for (std::size_t i = 0; i < a.harmonics_.size(); ++i) {
      if (a.harmonics_[i].k != b.harmonics_[i].k ||
          a.harmonics_[i].amplitude != b.harmonics_[i].amplitude)
        return false;
    }
    return true;
  }

 private:
  double mean_ = 1.0;
  std::vector<Harmonic> harmonics_;
};

inline RadiusJet eval(const RadiusProfile& p, double t) { return p.eval(t); }

struct ProfileBounds {
  double eps = 0.5;
  double r_min = 0.0;
  double r_max = 0.0;
  double dr_norm = 0.0;    // sup |R'|
  double ddr2_norm = 0.0;  // sup |(R^2)''|
  double sigma_velocity = kInf;   // r_min / (2 |R'|)
  double sigma_curvature = kInf;  // 2 sqrt(1 + sqrt(1 - eps^2)) r_min / sqrt(|(R^2)''|)
  double sigma = kInf;
};

inline double eps_alpha(double eps) { return std::sqrt(1.0 + std::sqrt(1.0 - eps * eps)); }

inline void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
}

inline ProfileBounds bounds(const RadiusProfile& p, double eps, int grid_n = 4096) {
  require_eps(eps);
  if (grid_n < 256) throw PreconditionError("bounds: grid_n must be at least 256");
  ProfileBounds b;
  b.eps = eps;
  if (p.is_constant()) {
    b.r_min = b.r_max = p.mean();
    return b;
  }
  b.r_max = detail::periodic_max([&](double t) { return p.eval(t).r; }, grid_n).second;
  b.r_min = -detail::periodic_max([&](double t) { return -p.eval(t).r; }, grid_n).second;
  b.dr_norm = detail::periodic_max([&](double t) { return std::abs(p.eval(t).dr); }, grid_n).second;
  b.ddr2_norm = detail::periodic_max(
                    [&](double t) {
                      const auto j = p.eval(t);
                      return std::abs(2.0 * (j.dr * j.dr + j.r * j.ddr));
                    },
                    grid_n)
                    .second;
  if (b.dr_norm > 0.0) b.sigma_velocity = b.r_min / (2.0 * b.dr_norm);
  if (b.ddr2_norm > 0.0) {
    b.sigma_curvature = 2.0 * eps_alpha(eps) * b.r_min / std::sqrt(b.ddr2_norm);
  }
  b.sigma = std::min(b.sigma_velocity, b.sigma_curvature);
  return b;
}

struct StationaryPoint {
  double t = 0.0;
  double ddr = 0.0;
};

// Roots of R' in [0, 1): sign changes on 1024 samples, then bisection.
inline std::vector<StationaryPoint> stationary_points(const RadiusProfile& p) {
  if (p.is_constant()) {
    throw PreconditionError("stationary_points: constant profile is degenerate");
  }
  constexpr int n = 1024;
  std::vector<StationaryPoint> out;
  auto dr = [&](double t) { return p.eval(t).dr; };
  double a = 0.0;
  double fa = dr(a);
  for (int i = 1; i <= n; ++i) {
    const double b = static_cast<double>(i) / n;
    const double fb = dr(b);
    if (fa == 0.0) {
      out.push_back({a, p.eval(a).ddr});
    } else if (fb != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double lo = a;
      double hi = b;
      double flo = fa;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double fm = dr(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      // polish; R' is smooth and its slope R'' is non-zero at a simple root
      double x = 0.5 * (lo + hi);
      for (int k = 0; k < 3; ++k) {
        const auto j = p.eval(x);
        if (j.ddr == 0.0) break;
        const double nx = x - j.dr / j.ddr;
        if (nx < a || nx > b) break;
        x = nx;
      }
      x -= std::floor(x);
      out.push_back({x, p.eval(x).ddr});
    }
    a = b;
    fa = fb;
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
  return out;
}

enum class ProfileClass { none, R, R_tilde };

inline const char* to_string(ProfileClass c) {
  switch (c) {
    case ProfileClass::none:
      return "none";
    case ProfileClass::R:
      return "R";
    case ProfileClass::R_tilde:
      return "R_tilde";
  }
  return "none";
}

// Signed slack of each defining inequality; positive means satisfied.
// The t-dependent entries refer to the stationary point with the most
// negative R'' (the strongest candidate witness).
struct ClassMargins {
  double sigma_gt_2 = 0.0;
  double sigma_gt_4 = 0.0;       // (i)
  double deceleration = 0.0;     // -(R''(t) r_min + |R'| r_max)
  double window_lower = 0.0;     // (ii) left: lhs - 3
  double window_order = 0.0;     // (ii) right: rhs - lhs
  double curvature = 0.0;        // (iii): -2 r_max^2 / (sigma^2 r_min) - R''(t)
  std::optional<double> candidate_t;
};

struct ClassVerdict {
  ProfileClass cls = ProfileClass::none;
  std::vector<StationaryPoint> witnesses;
  ClassMargins margins;
  ProfileBounds bounds;
  bool degenerate = false;
};

namespace detail {

struct WitnessTerms {
  double lhs = 0.0;  // 1 + sqrt(2 r_max^2 / (-R'' r_min - |R'| r_max))
  double rhs = 0.0;  // -1 + sqrt(2 r_min^2 / (2 r_max^2 / sigma^2 + |R'| r_max))
  double deceleration = 0.0;
  double curvature = 0.0;
};

inline WitnessTerms witness_terms(const ProfileBounds& b, double ddr) {
  WitnessTerms w;
  const double inv_sigma2 = std::isfinite(b.sigma) ? 1.0 / (b.sigma * b.sigma) : 0.0;
  w.deceleration = -(ddr * b.r_min + b.dr_norm * b.r_max);
  w.lhs = w.deceleration > 0.0 ? 1.0 + std::sqrt(2.0 * b.r_max * b.r_max / w.deceleration)
                               : kInf;
  const double denom = 2.0 * b.r_max * b.r_max * inv_sigma2 + b.dr_norm * b.r_max;
  w.rhs = denom > 0.0 ? -1.0 + std::sqrt(2.0 * b.r_min * b.r_min / denom) : kInf;
  w.curvature = -2.0 * b.r_max * b.r_max * inv_sigma2 / b.r_min - ddr;
  return w;
}

}  // namespace detail

inline ClassVerdict classify(const RadiusProfile& p, double eps, int grid_n = 4096) {
  ClassVerdict v;
  v.bounds = bounds(p, eps, grid_n);
  const auto& b = v.bounds;
  v.margins.sigma_gt_2 = b.sigma - 2.0;
  v.margins.sigma_gt_4 = b.sigma - 4.0;
  if (p.is_constant()) {
    v.degenerate = true;
    v.cls = ProfileClass::R;
    v.margins.deceleration = -b.dr_norm * b.r_max;
    v.margins.window_lower = -kInf;
    v.margins.window_order = -kInf;
    v.margins.curvature = 0.0;
    return v;
  }
  if (!(b.sigma > 2.0)) {
    v.cls = ProfileClass::none;
  } else {
    v.cls = ProfileClass::R;
  }
  const auto points = stationary_points(p);
  const StationaryPoint* best = nullptr;
  for (const auto& sp : points) {
    if (best == nullptr || sp.ddr < best->ddr) best = &sp;
    const auto w = detail::witness_terms(b, sp.ddr);
    const bool ok = w.deceleration > 0.0 && 3.0 < w.lhs && w.lhs < w.rhs && w.curvature > 0.0;
    if (ok) v.witnesses.push_back(sp);
  }
  if (best != nullptr) {
    const auto w = detail::witness_terms(b, best->ddr);
    v.margins.deceleration = w.deceleration;
    v.margins.window_lower = w.lhs - 3.0;
    v.margins.window_order = w.rhs - w.lhs;
    v.margins.curvature = w.curvature;
    v.margins.candidate_t = best->t;
  }
  if (v.cls == ProfileClass::R && b.sigma > 4.0 && !v.witnesses.empty()) {
    v.cls = ProfileClass::R_tilde;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Explicit members R_{k,delta,M}(t) = M + delta sin(2 pi k t) + delta sin(2 pi t)
// (k >= 2) and the single harmonic M + delta sin(2 pi t) (k == 1).

inline double k_bar(double eps) {
  require_eps(eps);
  const double a2 = 1.0 + std::sqrt(1.0 - eps * eps);
  return (a2 + std::sqrt(2.0 * a2 * a2 - 1.0)) / (a2 - 1.0);
}

inline std::pair<double, double> delta_window(int k) {
  const double pi = std::numbers::pi;
  const double kk = static_cast<double>(k);
  return {1.0 / (4.0 * pi * pi * (kk * kk + 1.0)), 1.0 / (2.0 * pi * (kk + 1.0))};
}

inline double single_harmonic_eps_threshold() {
  const double pi = std::numbers::pi;
  return std::sqrt(1.0 - 1.0 / ((pi - 1.0) * (pi - 1.0)));
}

inline RadiusProfile member_profile(int k, double delta, double mean) {
  if (k == 1) return RadiusProfile(mean, {{1, delta}});
  return RadiusProfile(mean, {{k, delta}, {1, delta}});
}

// Closed-form sufficient size of M: max of the two explicit
// lower bounds on M. For k == 1 the single harmonic of amplitude delta is the
// two-term family with amplitude delta / 2.
inline double sufficient_mean_bound(int k, double delta) {
  const double pi = std::numbers::pi;
  const double d = k == 1 ? 0.5 * delta : delta;
  const double kk = static_cast<double>(k);
  const double m1 = std::max(34.0 * d, 2.0 * d + 216.0 * pi * pi * (kk + 1.0) * (kk + 1.0));
  const double q = 4.0 * pi * pi * d * (kk * kk + 1.0);
  const double m3 = q > 1.0 ? 2.0 * d * (q + 1.0) / (q - 1.0) : kInf;
  return std::max(m1, m3);
}

// The asymptotic (M -> infinity) condition that closes the window argument.
inline bool sufficient_window_condition(int k, double eps) {
  const double pi = std::numbers::pi;
  const double a2 = eps_alpha(eps) * eps_alpha(eps);
  const double kk = static_cast<double>(k);
  return 1.0 / (2.0 * pi * (kk * kk + 1.0) - (kk + 1.0)) <
         a2 / (2.0 * pi * (kk * kk + 1.0) + a2 * (kk + 1.0));
}

struct MemberResult {
  double mean = 0.0;
  RadiusProfile profile;
  ClassVerdict verdict;
  double sufficient_mean_bound = 0.0;
  int grid_steps = 0;
};

namespace detail {

inline double ceil_sig3(double x) {
  const double e = std::floor(std::log10(x)) - 2.0;
  const double scale = std::pow(10.0, e);
  return std::ceil(x / scale - 1e-9) * scale;
}

inline double next_sig3(double x) {
  const double e = std::floor(std::log10(x)) - 2.0;
  return x + std::pow(10.0, e);
}

}  // namespace detail

// Admissibility of (k, delta, eps) for the explicit family; empty on success,
// otherwise the name of the violated inequality.
inline std::optional<std::string> member_parameter_violation(int k, double delta, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) return "0 < eps < 1";
  if (k < 1) return "k >= 1";
  if (k == 1) {
    if (!(eps < single_harmonic_eps_threshold())) return "eps < sqrt(1 - 1/(pi-1)^2)";
    const auto [lo, hi] = delta_window(1);
    if (!(0.5 * delta > lo)) return "delta/2 > 1/(4 pi^2 (k^2+1)) with k = 1";
    if (!(0.5 * delta < hi)) return "delta/2 < 1/(2 pi (k+1)) with k = 1";
    return std::nullopt;
  }
  if (!(k > k_bar(eps))) return "k > k_bar(eps)";
  const auto [lo, hi] = delta_window(k);
  if (!(delta > lo)) return "delta > 1/(4 pi^2 (k^2+1))";
  if (!(delta < hi)) return "delta < 1/(2 pi (k+1))";
  return std::nullopt;
}

// Smallest M (3 significant digits) at or above the search start for which
// the member classifies as R_tilde. The search walks a geometric grid with
// ratio 1.25 from m_hint (default: 4 * sum |amplitudes|), then bisects the
// last bracket.
inline MemberResult find_member(int k, double delta, double eps,
                                std::optional<double> m_hint = std::nullopt) {
  if (auto bad = member_parameter_violation(k, delta, eps)) {
    throw PreconditionError("find_member: parameters violate " + *bad);
  }
  const double amp_sum = k == 1 ? delta : 2.0 * delta;
  double start = m_hint.value_or(4.0 * amp_sum);
  if (!(start > amp_sum)) throw PreconditionError("find_member: M hint must exceed sum of amplitudes");

  auto passes = [&](double m) {
    return classify(member_profile(k, delta, m), eps).cls == ProfileClass::R_tilde;
  };

  MemberResult out;
  out.sufficient_mean_bound = sufficient_mean_bound(k, delta);
  double prev = start;
  double cur = start;
  int steps = 0;
  bool found = passes(cur);
  while (!found && steps < 400) {
    prev = cur;
    cur *= 1.25;
    ++steps;
    found = passes(cur);
  }
  if (!found) throw ConvergenceError("find_member: no R_tilde member on the geometric grid");
  double hi = cur;
  if (steps > 0) {
    double lo = prev;
    while ((hi - lo) > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (passes(mid)) hi = mid;
      else lo = mid;
    }
  }
  double m = detail::ceil_sig3(hi);
  for (int guard = 0; guard < 100 && !passes(m); ++guard) m = detail::next_sig3(m);
  out.mean = m;
  out.profile = member_profile(k, delta, m);
  out.verdict = classify(out.profile, eps);
  out.grid_steps = steps;
  return out;
}

}  // namespace bbill
