#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "bbill/aubry.hpp"
#include "bbill/simulate.hpp"
#include "support.hpp"

using namespace bbill;
namespace bt = bbill::testing;
constexpr double kPi = std::numbers::pi;

TEST(Simulate, StaticDiametralRun) {
  const TwistMap map(bt::static_ctx());
  const auto run_ = run(map, {0.0, 2.0}, 5);
  ASSERT_EQ(run_.records.size(), 5u);
  EXPECT_FALSE(run_.truncated);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(run_.records[i].t, static_cast<double>(i), 1e-12);
    EXPECT_NEAR(run_.records[i].K, 2.0, 1e-12);
  }
  EXPECT_NEAR(run_.final_state.t, 5.0, 1e-12);
}

TEST(Simulate, ReflectionAndEulerLagrange) {
  const auto ctx = bt::breathing_ctx();
  const TwistMap map(ctx);
  const auto res = run(map, {0.1, 1.7}, 1000);
  ASSERT_FALSE(res.truncated) << res.reason;
  std::vector<double> times;
  for (const auto& r : res.records) {
    const double dr = ctx.profile.eval(r.t).dr;
    EXPECT_LT(std::abs((r.rdot_plus - dr) + (r.rdot_minus - dr)), 1e-9);
    EXPECT_GT(r.segment.dtheta, 0.5 * kPi);
    EXPECT_LT(r.segment.dtheta, kPi);
    EXPECT_LT(interior_margin(r.segment, ctx.profile), 0.0);
    times.push_back(r.t);
  }
  times.push_back(res.final_state.t);
  EXPECT_LT(el_residual_open(ctx, times), 1e-9);
}

TEST(Simulate, ThetaAccumulatesAndAngularMomentumIsConstant) {
  const auto ctx = bt::breathing_ctx();
  const TwistMap map(ctx);
  const auto res = run(map, {0.6, 3.0}, 50, 0.5);
  ASSERT_EQ(res.records.size(), 50u);
  EXPECT_DOUBLE_EQ(res.records.front().theta, 0.5);
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    const auto& a = res.records[i - 1];
    EXPECT_NEAR(res.records[i].theta - a.theta, a.segment.dtheta, 1e-12);
    // r^2 theta' at the end of one leg equals c at the start of the next
    const double mid = 0.5 * (a.segment.t0 + a.segment.t1);
    const auto st = flight_state(a.segment, mid);
    const double e = 1e-6;
    const double dth = (flight_state(a.segment, mid + e).theta - flight_state(a.segment, mid - e).theta) / (2 * e);
    EXPECT_NEAR(st.r * st.r * dth, ctx.c, 1e-7);
  }
}

TEST(Simulate, InitialStateOutsideDomainThrows) {
  const TwistMap map(bt::breathing_ctx());
  EXPECT_THROW(run(map, {0.0, 0.0}, 3), DomainError);
}

TEST(Simulate, ChaoticRunTruncatesWithFlag) {
  const auto& m = bt::certified_member();
  const TwistMap map(make_context(m.profile, 0.5, 1.0));
  // a state in the chaotic zone that diffuses out of the strip
  const auto res = run(map, {0.537948, 13032.9}, 20000);
  if (res.truncated) {
    EXPECT_FALSE(res.reason.empty());
    EXPECT_LT(res.records.size(), 20000u);
  } else {
    EXPECT_EQ(res.records.size(), 20000u);
  }
}

TEST(Simulate, StaticTrajectoryThroughOrigin) {
  const TwistMap map(bt::static_ctx());
  const auto res = run(map, {0.0, 2.0}, 4);
  const auto pts = trajectory_samples(res.records, 0.25);
  // bounce points alternate between (1, 0) and (-1, 0), centre at t + 1/2
  for (const auto& p : pts) {
    EXPECT_NEAR(p.y, 0.0, 1e-12);
    const double frac = p.t - std::floor(p.t);
    if (std::abs(frac - 0.5) < 1e-12) {
      EXPECT_NEAR(p.x, 0.0, 1e-12);
    }
  }
  EXPECT_NEAR(pts.front().x, 1.0, 1e-12);
  EXPECT_NEAR(pts.back().x, 1.0, 1e-12);
}

TEST(Simulate, TrajectoryConfinedAndChordsMatch) {
  const auto ctx = bt::breathing_ctx();
  const TwistMap map(ctx);
  const auto res = run(map, {0.3, 2.2}, 40);
  for (const auto& r : res.records) {
    const auto pts = sample_segment(r.segment, r.segment.tau() / 64.0);
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      EXPECT_LT(pts[k].x * pts[k].x + pts[k].y * pts[k].y, std::pow(ctx.profile(pts[k].t), 2));
    }
    const double len = std::hypot(pts.back().x - pts.front().x, pts.back().y - pts.front().y);
    EXPECT_NEAR(len, r.segment.tau() * std::sqrt(r.segment.A), 1e-9);
  }
  const auto poly = trajectory_samples(res.records, 0.05);
  EXPECT_GT(poly.size(), res.records.size());
  for (std::size_t i = 1; i < poly.size(); ++i) EXPECT_GT(poly[i].t, poly[i - 1].t);
}

TEST(Simulate, EnergySeries) {
  const TwistMap smap(bt::static_ctx(0.05));
  const auto flat = energy_series(run(smap, {0.0, 1.5}, 20).records);
  for (const auto& e : flat) EXPECT_NEAR(e.energy, flat.front().energy, 1e-12);

  const auto ctx = bt::breathing_ctx();
  const auto b = bounds(ctx.profile, 0.5);
  const auto series = energy_series(run(TwistMap(ctx), {0.0, 1.5}, 200).records);
  for (const auto& e : series) EXPECT_GT(e.energy, ctx.c * ctx.c / (2 * b.r_max * b.r_max));
  EXPECT_THROW(energy_series({}), PreconditionError);
  EXPECT_THROW(trajectory_samples({}, 0.1), PreconditionError);
}

TEST(Simulate, CsvExports) {
  const TwistMap map(bt::static_ctx());
  const auto res = run(map, {0.0, 2.0}, 3);
  std::ostringstream a;
  write_bounces_csv(a, res.records);
  EXPECT_EQ(a.str().rfind("n,t,K,rdot_plus,theta\n", 0), 0u);
  std::ostringstream b;
  write_trajectory_csv(b, trajectory_samples(res.records, 0.5));
  EXPECT_EQ(b.str().rfind("t,x,y\n", 0), 0u);
}
