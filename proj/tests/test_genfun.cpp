#include <gtest/gtest.h>

#include <random>

#include "bbill/genfun.hpp"
#include "support.hpp"

using namespace bbill;
namespace bt = bbill::testing;

namespace {

struct Pt {
  double t0, t1;
};

Pt random_point(std::mt19937_64& rng, double sigma) {
  const double t0 = bt::uniform(rng, -2.0, 2.0);
  return {t0, t0 + bt::uniform(rng, 0.1, 0.95) * sigma};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(GenFun, StaticDiameterValues) {
  const auto ctx = bt::static_ctx();
  EXPECT_NEAR(h(ctx, 0.0, 1.0), 2.0, 1e-15);
  const auto g = grad_h(ctx, 0.0, 1.0);
  EXPECT_NEAR(g.d1, 2.0, 1e-14);
  EXPECT_NEAR(g.d2, -2.0, 1e-14);
  const auto hs = hess_h(ctx, 0.0, 1.0);
  EXPECT_NEAR(hs.d11, 4.0, 1e-13);
  EXPECT_NEAR(hs.d22, 4.0, 1e-13);
  EXPECT_NEAR(hs.d12, -4.0, 1e-13);
}

TEST(GenFun, ContextPreconditions) {
  EXPECT_THROW(make_context(bt::breathing(), 0.5, 1.0), PreconditionError);
  EXPECT_THROW(make_context(bt::breathing(), 0.5, -0.1), PreconditionError);
  EXPECT_NO_THROW(make_context(bt::breathing(), 0.5, 0.1));
}

TEST(GenFun, StripViolation) {
  const auto ctx = bt::breathing_ctx();
  EXPECT_THROW(h(ctx, 0.0, 0.0), DomainError);
  EXPECT_THROW(h(ctx, 0.0, ctx.sigma + 0.1), DomainError);
}

TEST(GenFun, Periodicity) {
  const auto ctx = bt::breathing_ctx();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(rng, ctx.sigma);
    EXPECT_NEAR(h(ctx, p.t0 + 1, p.t1 + 1), h(ctx, p.t0, p.t1), 1e-12);
    const auto a = hess_h(ctx, p.t0 + 1, p.t1 + 1);
    const auto b = hess_h(ctx, p.t0, p.t1);
    EXPECT_NEAR(a.d12, b.d12, 1e-9 * std::abs(b.d12));
  }
}

TEST(GenFun, ActionMatchesLagrangianQuadrature) {
  const auto ctx = bt::breathing_ctx();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_point(rng, ctx.sigma);
    const auto seg = flight_of(ctx, p.t0, p.t1 - p.t0);
    EXPECT_NEAR(h(ctx, p.t0, p.t1), bt::action_by_quadrature(seg), 1e-9);
  }
}

TEST(GenFun, GradientMatchesFiniteDifferences) {
  const auto ctx = bt::breathing_ctx();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(rng, ctx.sigma);
    const auto g = grad_h(ctx, p.t0, p.t1);
    const double d1 = bt::fd([&](double x) { return h(ctx, x, p.t1); }, p.t0, 1e-4);
    const double d2 = bt::fd([&](double x) { return h(ctx, p.t0, x); }, p.t1, 1e-4);
    EXPECT_LT(rel(g.d1, d1), 1e-6);
    EXPECT_LT(rel(g.d2, d2), 1e-6);
  }
}

TEST(GenFun, HessianMatchesFiniteDifferences) {
  const auto ctx = bt::breathing_ctx();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(rng, ctx.sigma);
    const auto hs = hess_h(ctx, p.t0, p.t1);
    const double d11 = bt::fd([&](double x) { return grad_h(ctx, x, p.t1).d1; }, p.t0, 1e-4);
    const double d12 = bt::fd([&](double x) { return grad_h(ctx, p.t0, x).d1; }, p.t1, 1e-4);
    const double d21 = bt::fd([&](double x) { return grad_h(ctx, x, p.t1).d2; }, p.t0, 1e-4);
    const double d22 = bt::fd([&](double x) { return grad_h(ctx, p.t0, x).d2; }, p.t1, 1e-4);
    EXPECT_LT(rel(hs.d11, d11), 1e-5);
    EXPECT_LT(rel(hs.d12, d12), 1e-5);
    EXPECT_LT(rel(hs.d12, d21), 1e-5);
    EXPECT_LT(rel(hs.d22, d22), 1e-5);
  }
}

TEST(GenFun, FirstDerivativeFromRadialVelocity) {
  // d1 h = rdot^2 / 2 + c^2 / (2 R0^2) - rdot R'(t0) with rdot = rdot(t0+)
  const auto ctx = bt::breathing_ctx();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_point(rng, ctx.sigma);
    const auto seg = flight_of(ctx, p.t0, p.t1 - p.t0);
    const double rd = flight_state(seg, seg.t0).rdot;
    const auto j = ctx.profile.eval(p.t0);
    const double expect = 0.5 * rd * rd + ctx.c * ctx.c / (2 * j.r * j.r) - rd * j.dr;
    EXPECT_NEAR(grad_h(ctx, p.t0, p.t1).d1, expect, 1e-9);
  }
}

TEST(GenFun, MixedDerivativeNegativeOnGrid) {
  const auto ctx = bt::breathing_ctx();
  const double beta = 0.05 * ctx.sigma;
  for (int i = 0; i < 200; ++i) {
    const double t0 = i / 200.0;
    for (int j = 0; j < 200; ++j) {
      const double tau = beta + (ctx.sigma - 2 * beta) * j / 199.0;
      EXPECT_LT(hess_h_gap(ctx, t0, tau).d12, 0.0);
    }
  }
}

TEST(GenFun, MixedDerivativeShortFlightAsymptotics) {
  const auto ctx = bt::breathing_ctx();
  const double tau = 1e-3 * ctx.sigma;
  for (double t0 : {0.0, 0.3, 0.61}) {
    const double r0 = ctx.profile(t0);
    const double r1 = ctx.profile(t0 + tau);
    // tau^3 d12 h -> -(R0 + R1)^2 for short flights
    const double lim = -(r0 + r1) * (r0 + r1);
    EXPECT_NEAR(hess_h_gap(ctx, t0, tau).d12 * tau * tau * tau / lim, 1.0, 0.05);
  }
}

TEST(GenFun, GapAndLiftedFormsAgree) {
  const auto ctx = bt::breathing_ctx();
  EXPECT_NEAR(h_gap(ctx, 0.2, 1.7), h(ctx, 0.2, 1.9), 1e-13);
}
