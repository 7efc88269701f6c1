#pragma once

// JSON forms of profiles, verdicts, orbits and certificates. Requires
// nlohmann/json (vendored as json.hpp).

#include <cmath>
#include <string>

#include <json.hpp>

#include "bbill/aubry.hpp"
#include "bbill/chaoscert.hpp"
#include "bbill/radius.hpp"
#include "bbill/simulate.hpp"

namespace bbill {

inline constexpr const char* kVersion = "bbill 1.0.0";

using json = nlohmann::ordered_json;

// Non-finite doubles become null so that every document is valid JSON.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json profile_to_json(const RadiusProfile& p) {
  json h = json::array();
  for (const auto& hm : p.harmonics()) h.push_back(json::array({hm.k, hm.amplitude}));
  return json{{"mean", p.mean()}, {"harmonics", h}};
}

// {"mean": M, "harmonics": [[k, amplitude], ...]}
inline RadiusProfile profile_from_json(const json& j) {
  if (!j.is_object() || !j.contains("mean") || !j.at("mean").is_number()) {
    throw PreconditionError("profile: expected an object with a numeric \"mean\"");
  }
  std::vector<Harmonic> hs;
  if (j.contains("harmonics")) {
    const auto& arr = j.at("harmonics");
    if (!arr.is_array()) throw PreconditionError("profile: \"harmonics\" must be an array");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number()) {
        throw PreconditionError("profile: each harmonic must be [k, amplitude] with integer k");
      }
      hs.push_back({e[0].get<int>(), e[1].get<double>()});
    }
  }
  return RadiusProfile(j.at("mean").get<double>(), std::move(hs));
}

inline RadiusProfile parse_profile(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PreconditionError(std::string("profile: invalid JSON: ") + e.what());
  }
  return profile_from_json(j);
}

inline json bounds_to_json(const ProfileBounds& b) {
  return json{{"eps", b.eps},
              {"r_min", b.r_min},
              {"r_max", b.r_max},
              {"dr_norm", b.dr_norm},
              {"ddr2_norm", b.ddr2_norm},
              {"sigma_velocity", num(b.sigma_velocity)},
              {"sigma_curvature", num(b.sigma_curvature)},
              {"sigma", num(b.sigma)}};
}

inline json verdict_to_json(const ClassVerdict& v) {
  json w = json::array();
  for (const auto& s : v.witnesses) w.push_back(json{{"t", s.t}, {"ddr", s.ddr}});
  const auto& m = v.margins;
  json margins{{"sigma_gt_2", num(m.sigma_gt_2)},
               {"sigma_gt_4", num(m.sigma_gt_4)},
               {"deceleration", num(m.deceleration)},
               {"window_lower", num(m.window_lower)},
               {"window_order", num(m.window_order)},
               {"curvature", num(m.curvature)},
               {"candidate_t", m.candidate_t ? json(*m.candidate_t) : json(nullptr)}};
  return json{{"class", to_string(v.cls)},
              {"degenerate", v.degenerate},
              {"witnesses", w},
              {"margins", margins},
              {"bounds", bounds_to_json(v.bounds)}};
}

inline json segment_to_json(const FlightSegment& s) {
  return json{{"t0", s.t0},         {"t1", s.t1},         {"c", s.c},
              {"A", s.A},           {"B", s.B()},         {"theta0", s.theta0},
              {"dtheta", s.dtheta}, {"ell_minus", s.ell_minus}, {"energy", s.energy()}};
}

inline json orbit_to_json(const MinimalOrbit& o) {
  return json{{"p", o.p},
              {"q", o.q},
              {"times", o.times},
              {"Ks", o.Ks},
              {"action", o.action},
              {"residual", o.residual},
              {"monotone", o.monotone},
              {"gap_box", json::array({o.gap_lo, o.gap_hi})},
              {"starts", o.starts},
              {"converged_starts", o.converged_starts},
              {"seed", o.seed}};
}

inline json hull_to_json(const HullSample& h) {
  return json{{"omega", h.omega}, {"p", h.p},     {"q", h.q},
              {"xs", h.xs},       {"phi", h.phi}, {"eta", h.eta}};
}

inline json certificate_to_json(const ChaosCertificate& c) {
  json bands = json::array();
  for (const auto& b : c.bands) bands.push_back(json{{"omega", b.omega}, {"k_lo", b.k_lo}, {"k_hi", b.k_hi}});
  json grid = json::array();
  for (const auto& s : c.a_grid) grid.push_back(json{{"K", s.K}, {"a", num(s.a)}, {"alpha", num(s.alpha)}});
  return json{{"version", kVersion},
              {"profile", profile_to_json(c.profile)},
              {"profile_literal", c.profile.literal()},
              {"eps", c.eps},
              {"c", c.c},
              {"class", c.profile_class},
              {"verdict", c.certified ? "certified" : "not-certified"},
              {"reason", c.reason},
              {"t_bar", c.t_bar},
              {"ddr_bar", c.ddr_bar},
              {"sigma", num(c.sigma)},
              {"sigma_star", c.sigma_star},
              {"omega_window", json::array({c.window.lo, c.window.hi})},
              {"chain_margin", num(c.chain_margin)},
              {"k_union", json::array({num(c.k_union_lo), num(c.k_union_hi)})},
              {"c2f_bound", c.c2f_bound},
              {"k_range", json::array({num(c.k_lo), num(c.k_hi)})},
              {"a_max", num(c.a_max)},
              {"alpha_gap", num(c.alpha_gap)},
              {"margin", num(c.margin)},
              {"options",
               json{{"omega_grid", c.options.omega_grid},
                    {"k_samples", c.options.k_samples},
                    {"grid_n", c.options.grid_n}}},
              {"bands", bands},
              {"a_grid", grid}};
}

inline void write_a_grid_csv(std::ostream& os, const ChaosCertificate& c) {
  const auto prec = os.precision(17);
  os << "K,a_c\n";
  for (const auto& s : c.a_grid) os << s.K << ',' << s.a << '\n';
  os.precision(prec);
}

}  // namespace bbill
