#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "bbill/radius.hpp"
#include "support.hpp"

using namespace bbill;
namespace bt = bbill::testing;
constexpr double kPi = std::numbers::pi;

TEST(Radius, ConstantProfileEval) {
  const auto j = eval(RadiusProfile::constant(1.0), 0.37);
  EXPECT_EQ(j.r, 1.0);
  EXPECT_EQ(j.dr, 0.0);
  EXPECT_EQ(j.ddr, 0.0);
}

TEST(Radius, SingleHarmonicJet) {
  const RadiusProfile p(2.0, {{1, 0.1}});
  const auto j = p.eval(0.25);
  EXPECT_NEAR(j.r, 2.1, 1e-15);
  EXPECT_NEAR(j.dr, 0.0, 1e-15);
  EXPECT_NEAR(j.ddr, -0.1 * 4 * kPi * kPi, 1e-13);
}

TEST(Radius, DerivativesMatchFiniteDifferences) {
  const auto p = bt::breathing();
  for (double t : {0.013, 0.21, 0.5, 0.77}) {
    EXPECT_NEAR(p.eval(t).dr, bt::fd([&](double x) { return p(x); }, t, 1e-4), 1e-10);
    EXPECT_NEAR(p.eval(t).ddr, bt::fd([&](double x) { return p.eval(x).dr; }, t, 1e-4), 1e-9);
  }
}

TEST(Radius, Periodicity) {
  const auto p = bt::breathing();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double t = bt::uniform(rng, -5.0, 5.0);
    const auto a = p.eval(t);
    const auto b = p.eval(t + 1.0);
    EXPECT_NEAR(a.r, b.r, 1e-14);
    EXPECT_NEAR(a.dr, b.dr, 1e-12);
    EXPECT_NEAR(a.ddr, b.ddr, 1e-10);
  }
}

TEST(Radius, RejectsNonPositiveRadius) {
  EXPECT_THROW(RadiusProfile(1.0, {{1, 0.6}, {2, 0.5}}), PreconditionError);
  EXPECT_THROW(RadiusProfile(-1.0, {}), PreconditionError);
  EXPECT_THROW(RadiusProfile(1.0, {{0, 0.1}}), PreconditionError);
}

TEST(Radius, TwoHarmonicNorms) {
  // sin(2 pi 5 t) and sin(2 pi t) peak together at t = 1/4
  const int k = 5;
  const double d = 0.01;
  const double m = 50.0;
  const auto b = bounds(member_profile(k, d, m), 0.5);
  EXPECT_NEAR(b.r_min, m - 2 * d, 1e-10 * m);
  EXPECT_NEAR(b.r_max, m + 2 * d, 1e-10 * m);
  EXPECT_NEAR(b.dr_norm, 2 * kPi * d * (k + 1), 1e-10);
}

TEST(Radius, ConstantSigmaIsInfinite) {
  const auto b = bounds(RadiusProfile::constant(1.0), 0.5);
  EXPECT_TRUE(std::isinf(b.sigma));
  EXPECT_EQ(b.r_min, 1.0);
}

TEST(Radius, SigmaOfCertifiedScaleProfile) {
  const auto b = bounds(RadiusProfile(9000.0, {{1, 0.05}}), 0.5);
  EXPECT_NEAR(b.sigma, 130.4, 1.0);
}

TEST(Radius, BoundsDominateSamples) {
  const auto p = bt::breathing();
  const auto b = bounds(p, 0.5);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double t = detail::uniform01(rng);
    const auto j = p.eval(t);
    EXPECT_LE(b.r_min, j.r + 1e-14);
    EXPECT_GE(b.r_max, j.r - 1e-14);
    EXPECT_LE(std::abs(j.dr), b.dr_norm * (1 + 1e-10));
    EXPECT_LE(std::abs(2 * (j.dr * j.dr + j.r * j.ddr)), b.ddr2_norm * (1 + 1e-10));
  }
  EXPECT_DOUBLE_EQ(b.sigma, std::min(b.sigma_velocity, b.sigma_curvature));
}

TEST(Radius, BoundsRejectBadArguments) {
  EXPECT_THROW(bounds(bt::breathing(), 1.0), PreconditionError);
  EXPECT_THROW(bounds(bt::breathing(), 0.5, 100), PreconditionError);
}

TEST(Radius, StationaryPointsOfSinusoid) {
  const auto pts = stationary_points(RadiusProfile(1.0, {{1, 0.05}}));
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[0].t, 0.25, 1e-12);
  EXPECT_NEAR(pts[1].t, 0.75, 1e-12);
  EXPECT_NEAR(pts[0].ddr, -4 * kPi * kPi * 0.05, 1e-12);
  EXPECT_NEAR(pts[1].ddr, 4 * kPi * kPi * 0.05, 1e-12);
  EXPECT_NEAR(pts[0].ddr, -1.9739, 1e-4);
}

TEST(Radius, StationaryPointResiduals) {
  const auto p = member_profile(6, 0.01, 40.0);
  const auto pts = stationary_points(p);
  EXPECT_GE(pts.size(), 2u);
  for (const auto& s : pts) EXPECT_LT(std::abs(p.eval(s.t).dr), 1e-10);
  EXPECT_THROW(stationary_points(RadiusProfile::constant(2.0)), PreconditionError);
}

TEST(Radius, ClassifyConstant) {
  const auto v = classify(RadiusProfile::constant(1.0), 0.5);
  EXPECT_EQ(v.cls, ProfileClass::R);
  EXPECT_TRUE(v.degenerate);
  EXPECT_TRUE(v.witnesses.empty());
}

TEST(Radius, ClassifyLargeSingleHarmonic) {
  const auto v = classify(RadiusProfile(9000.0, {{1, 0.05}}), 0.5);
  EXPECT_EQ(v.cls, ProfileClass::R_tilde);
  ASSERT_FALSE(v.witnesses.empty());
  EXPECT_NEAR(v.witnesses.front().t, 0.25, 1e-10);
  EXPECT_GT(v.margins.sigma_gt_4, 0.0);
  EXPECT_GT(v.margins.window_order, 0.0);
  EXPECT_GT(v.margins.curvature, 0.0);
}

TEST(Radius, ClassifyShortWindowIsNone) {
  const auto v = classify(RadiusProfile(1.0, {{1, 0.2}}), 0.5);
  EXPECT_EQ(v.cls, ProfileClass::none);
  EXPECT_NEAR(v.bounds.sigma_velocity, 0.8 / (0.8 * kPi), 1e-9);
  EXPECT_LT(v.margins.sigma_gt_2, 0.0);
}

TEST(Radius, RTildeImpliesR) {
  // every R_tilde profile passes the sigma > 2 test as well
  for (double m : {200.0, 1000.0, 9000.0}) {
    const auto v = classify(RadiusProfile(m, {{1, 0.05}}), 0.5);
    if (v.cls == ProfileClass::R_tilde) {
      EXPECT_GT(v.margins.sigma_gt_2, 0.0);
    }
  }
}

TEST(Radius, MemberParameterFormulas) {
  EXPECT_NEAR(k_bar(0.5), 4.975, 1e-3);
  const auto [lo, hi] = delta_window(5);
  EXPECT_NEAR(lo, 9.75e-4, 1e-6);
  EXPECT_NEAR(hi, 2.653e-2, 1e-5);
  const double pi = std::numbers::pi;
  EXPECT_DOUBLE_EQ(single_harmonic_eps_threshold(), std::sqrt(1.0 - 1.0 / ((pi - 1.0) * (pi - 1.0))));
  EXPECT_NEAR(single_harmonic_eps_threshold(), 0.88429, 1e-5);
  EXPECT_GT(single_harmonic_eps_threshold(), 0.5);
}

TEST(Radius, MemberParameterViolationsAreNamed) {
  EXPECT_FALSE(member_parameter_violation(5, 0.01, 0.5).has_value());
  EXPECT_FALSE(member_parameter_violation(1, 0.05, 0.5).has_value());
  const auto small_k = member_parameter_violation(4, 0.01, 0.5);
  ASSERT_TRUE(small_k.has_value());
  EXPECT_NE(small_k->find("k_bar"), std::string::npos);
  EXPECT_TRUE(member_parameter_violation(5, 0.5, 0.5).has_value());
  EXPECT_TRUE(member_parameter_violation(1, 0.05, 0.95).has_value());
  EXPECT_THROW(find_member(4, 0.01, 0.5), PreconditionError);
}

TEST(Radius, FindMemberReclassifies) {
  const auto m = find_member(5, 0.01, 0.5);
  EXPECT_EQ(m.verdict.cls, ProfileClass::R_tilde);
  EXPECT_EQ(classify(m.profile, 0.5).cls, ProfileClass::R_tilde);
  EXPECT_EQ(m.mean, detail::ceil_sig3(m.mean));
  EXPECT_GT(m.sufficient_mean_bound, 0.0);
}

TEST(Radius, FindMemberFromHint) {
  const auto& m = bt::certified_member();
  EXPECT_GE(m.mean, sufficient_mean_bound(1, 0.05));
  EXPECT_EQ(m.verdict.cls, ProfileClass::R_tilde);
  EXPECT_NEAR(sufficient_mean_bound(1, 0.05), 2 * 0.025 + 216 * kPi * kPi * 4, 1e-9);
}
