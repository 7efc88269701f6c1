#pragma once

// Bouncing solutions generated by iterating the map, with the flight of
// every leg attached.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "bbill/bmap.hpp"
#include "bbill/flight.hpp"

namespace bbill {

struct BounceRecord {
  long n = 0;
  double t = 0.0;
  double K = 0.0;
  double rdot_plus = 0.0;
  // Incoming radial velocity: taken from the previous leg's flight; for the
  // first bounce it is reconstructed from the reflection law.
  double rdot_minus = 0.0;
  double theta = 0.0;
  FlightSegment segment;  // leg leaving this bounce
};

struct RunResult {
  std::vector<BounceRecord> records;
  CylinderState final_state;
  bool truncated = false;
  std::string reason;
};

inline RunResult run(const TwistMap& map, CylinderState s0, long n, double theta0 = 0.0) {
  if (!map.in_domain(s0)) throw DomainError("run: initial state outside the map domain");
  RunResult out;
  out.records.reserve(static_cast<std::size_t>(std::max(0L, n)));
  const auto& ctx = map.context();
  CylinderState s = s0;
  double theta = theta0;
  double incoming = 0.0;
  for (long i = 0; i < n; ++i) {
    if (!map.in_domain(s)) {
      out.truncated = true;
      out.reason = "state left the map domain (K <= sigma_*) at bounce " + std::to_string(i);
      break;
    }
    double tau = 0.0;
    try {
      tau = map.forward_gap(s);
    } catch (const DomainError& e) {
      out.truncated = true;
      out.reason = e.what();
      break;
    }
    const auto p = detail::pair_terms(ctx, s.t, tau);
    BounceRecord rec;
    rec.n = i;
    rec.t = s.t;
    rec.K = s.K;
    rec.segment = detail::make_segment(s.t, tau, ctx.c, p.r0, p.r1);
    rec.segment.theta0 = theta;
    rec.rdot_plus = rec.segment.ell_minus / p.r0;
    rec.rdot_minus = i == 0 ? -rec.rdot_plus + 2.0 * p.dr0 : incoming;
    rec.theta = theta;
    incoming = flight_state(rec.segment, rec.segment.t1).rdot;
    theta += rec.segment.dtheta;
    s = {s.t + tau, -detail::h2_value(p)};
    out.records.push_back(rec);
  }
  out.final_state = s;
  return out;
}

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

inline std::vector<TrajectoryPoint> trajectory_samples(const std::vector<BounceRecord>& records,
                                                       double dt) {
  if (records.empty()) throw PreconditionError("trajectory_samples: no records");
  if (!(dt > 0.0)) throw PreconditionError("trajectory_samples: dt must be positive");
  std::vector<TrajectoryPoint> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto samples = sample_segment(records[i].segment, dt);
    // the last sample of a leg is the first bounce point of the next one
    const std::size_t skip_last = i + 1 < records.size() ? 1 : 0;
    for (std::size_t k = 0; k + skip_last < samples.size(); ++k) {
      out.push_back({samples[k].t, samples[k].x, samples[k].y});
    }
  }
  return out;
}

struct EnergyPoint {
  double t = 0.0;
  double energy = 0.0;
};

inline std::vector<EnergyPoint> energy_series(const std::vector<BounceRecord>& records) {
  if (records.empty()) throw PreconditionError("energy_series: no records");
  std::vector<EnergyPoint> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.t, r.segment.energy()});
  return out;
}

inline void write_bounces_csv(std::ostream& os, const std::vector<BounceRecord>& records) {
  const auto prec = os.precision(17);
  os << "n,t,K,rdot_plus,theta\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.t << ',' << r.K << ',' << r.rdot_plus << ',' << r.theta << '\n';
  }
  os.precision(prec);
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& pts) {
  const auto prec = os.precision(17);
  os << "t,x,y\n";
  for (const auto& p : pts) os << p.t << ',' << p.x << ',' << p.y << '\n';
  os.precision(prec);
}

}  // namespace bbill
