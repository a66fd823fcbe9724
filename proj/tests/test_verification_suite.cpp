#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ebl/spectrum.hpp"
#include "ebl/verification.hpp"
#include "oracles.hpp"

using namespace ebl;

namespace {

// P1 interpolant of (r/s)^a on [r, r + length], tapered linearly to 0 over the second half
PiecewiseLinear power_profile(double r, double a, double length, int pieces) {
  PiecewiseLinear f;
  const double end = r + length, mid = r + 0.5 * length;
  for (int i = 0; i <= pieces; ++i) {
    const double s = i == pieces ? end : r * std::pow(end / r, static_cast<double>(i) / pieces);
    const double taper = s <= mid ? 1.0 : (end - s) / (end - mid);
    f.knots.push_back(s);
    f.values.push_back(std::pow(r / s, a) * taper);
  }
  return f;
}

}  // namespace

TEST(Hardy, SidesAgainstAdaptiveQuadrature) {
  const PiecewiseLinear f{{1.0, 1.7, 2.2, 4.0}, {0.8, -0.3, 0.6, 0.0}};
  for (int N : {2, 3})
    for (double lambda : {0.5, 2.0}) {
      const CheckReport c = hardy_check(N, lambda, 1.0, f);
      double grad = 0.0, mass = 0.0;
      for (std::size_t i = 0; i + 1 < f.knots.size(); ++i) {
        const double a = f.knots[i], b = f.knots[i + 1], d = (f.values[i + 1] - f.values[i]) / (b - a);
        grad += d * d * oracle::adaptive_simpson([&](double s) { return std::pow(s, N - 1); }, a, b, 1e-13);
        mass += oracle::adaptive_simpson([&](double s) { return f(s) * f(s) * std::pow(s, N - 3); }, a, b, 1e-13);
      }
      EXPECT_NEAR(c.lhs, 0.64, 1e-15);
      EXPECT_NEAR(c.rhs, grad / lambda + (2.0 - N + lambda) * mass, 1e-10);
      EXPECT_TRUE(c.pass);
    }
}

TEST(Hardy, NearlySharpForThePowerProfile) {
  // equality holds for f = (r/s)^lambda; P1 interpolation and truncation leave a small gap
  for (int N : {2, 3})
    for (double lambda : {1.0, 5.0}) {
      const CheckReport c = hardy_check(N, lambda, 1.0, power_profile(1.0, lambda, 400.0, 4000));
      EXPECT_TRUE(c.pass);
      EXPECT_GE(c.margin, 0.0);
      EXPECT_LT(c.margin / c.rhs, 1e-2) << N << " " << lambda;
    }
}

TEST(Hardy, ZeroFunctionHasZeroMargin) {
  const CheckReport c = hardy_check(2, 1.0, 1.0, PiecewiseLinear{{1.0, 2.0}, {0.0, 0.0}});
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_EQ(c.margin, 0.0);
  EXPECT_TRUE(c.pass);
}

TEST(Hardy, RejectsInvalidInput) {
  const PiecewiseLinear f{{1.0, 2.0}, {1.0, 0.0}};
  EXPECT_THROW(hardy_check(1, 1.0, 1.0, f), InvalidArgument);
  EXPECT_THROW(hardy_check(2, 0.0, 1.0, f), InvalidArgument);
  EXPECT_THROW(hardy_check(2, 1.0, 1.5, f), InvalidArgument);
  EXPECT_THROW(hardy_check(2, 1.0, 1.0, PiecewiseLinear{{1.0, 2.0}, {1.0, 0.5}}), InvalidArgument);
}

TEST(Hardy, SeededFamilyPasses) {
  for (const CheckReport& c : hardy_family(300, 2024)) EXPECT_TRUE(c.pass) << c.inputs << " seed " << c.seed << " " << c.margin;
}

TEST(Trace, BoundaryModeIsHardyWithLambdaN) {
  for (int N : {2, 3}) {
    const GroupSpec g = GroupSpec::product_orthogonal(N, 1);
    const int k = g.mode_indices().front();
    ASSERT_EQ(g.mu(k), 2.0 * N);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const PiecewiseLinear f = random_piecewise_linear(1.0, seed);
      const CheckReport t = trace_check(N, 1.0, f, k, g);
      const CheckReport h = hardy_check(N, N, 1.0, f);
      EXPECT_NEAR(t.lhs, h.lhs, 1e-14);
      EXPECT_NEAR(t.rhs, h.rhs, 1e-12 * std::max(1.0, h.rhs));
    }
  }
}

TEST(Trace, RejectsTheMeanMode) {
  const GroupSpec g = GroupSpec::product_orthogonal(2, 1);
  EXPECT_THROW(trace_check(2, 1.0, random_piecewise_linear(1.0, 5), 0, g), InvalidArgument);
  EXPECT_THROW(trace_check(3, 1.0, random_piecewise_linear(1.0, 5), 2, g), InvalidArgument);
}

TEST(Trace, VanishingBoundaryValue) {
  const GroupSpec g = GroupSpec::product_orthogonal(3, 1);
  const CheckReport c = trace_check(3, 1.0, PiecewiseLinear{{1.0, 1.5, 3.0}, {0.0, 0.7, 0.0}}, 2, g);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_GT(c.margin, 0.0);
}

TEST(Trace, SeededFamilyPasses) {
  for (const CheckReport& c : trace_family(120, 99)) EXPECT_TRUE(c.pass) << c.inputs << " seed " << c.seed;
}

TEST(Families, SeedsAreReproducibleAndThreadIndependent) {
  const auto a = hardy_family(64, 11), b = hardy_family(64, 11, 4), c = hardy_family(64, 12);
  std::set<std::uint64_t> seeds;
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].margin, b[i].margin);
    EXPECT_EQ(a[i].inputs, b[i].inputs);
    differs = differs || a[i].margin != c[i].margin;
    seeds.insert(a[i].seed);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(seeds.size(), a.size());
  const PiecewiseLinear f = random_piecewise_linear(2.0, 42), g = random_piecewise_linear(2.0, 42);
  EXPECT_EQ(f.knots, g.knots);
  EXPECT_EQ(f.values, g.values);
  EXPECT_EQ(f.knots.front(), 2.0);
  EXPECT_NE(f.values.front(), 0.0);
  EXPECT_EQ(f.values.back(), 0.0);
}

TEST(ParallelMap, OrderAndErrors) {
  const auto v = parallel_map<int>(37, 5, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(10, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw InvalidArgument("seven");
                                   return 0;
                                 }),
               InvalidArgument);
}

TEST(GdegWitness, PassesBelowThresholdAndMatchesNehari) {
  const GroupSpec g = GroupSpec::dihedral(2);
  for (double lambda : {0.1, 0.25, 0.4}) {
    const auto s = ground_state_at(2, 3.0, lambda, GridPolicy{});
    const CheckReport c = gdeg_witness(s.params, s.grid, s.u, g);
    EXPECT_TRUE(c.pass) << lambda;
    EXPECT_LT(c.lhs, 0.0);
    // Nehari gives Q(u Y) = (1 - p) int u^{p+1} + lambda mu int u^2 r^{-2}
    const auto w = s.grid->weights();
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      const double u = s.u.values[j], r = s.grid->node(j);
      a += w[j] * std::pow(u, 4);
      b += w[j] * u * u / (r * r);
    }
    const double expected = -2.0 * a + lambda * 4.0 * b;
    EXPECT_NEAR(c.lhs, expected, 1e-8 * std::abs(expected)) << lambda;
  }
}

TEST(GdegWitness, RefusesLambdaNearTheThreshold) {
  const auto s = ground_state_at(2, 3.0, 0.48, GridPolicy{500});
  EXPECT_THROW(gdeg_witness(s.params, s.grid, s.u, GroupSpec::dihedral(2)), InvalidArgument);
}

TEST(RadialIdentities, AllPassOnTheTestGrid) {
  const auto s = ground_state_at(3, 2.0, 4.0, GridPolicy{});
  const auto checks = radial_identity_checks(s);
  ASSERT_EQ(checks.size(), 3u);
  for (const CheckReport& c : checks) EXPECT_TRUE(c.pass) << c.name << " " << c.lhs << " " << c.rhs;
}

TEST(KeyPositivity, HoldsAtLargeLambdaOnly) {
  const GroupSpec g = GroupSpec::dihedral(2);
  EXPECT_TRUE(key_positivity_check(ground_state_at(2, 3.0, 2000.0, GridPolicy{1000}), g).pass);
  EXPECT_FALSE(key_positivity_check(ground_state_at(2, 3.0, 10.0, GridPolicy{1000}), g).pass);
}

TEST(WeaklyDecreasing, Logic) {
  EXPECT_TRUE(weakly_decreasing({4.0, 2.0, 1.0}));
  EXPECT_TRUE(weakly_decreasing({4.0, 4.1, 1.0}));
  EXPECT_FALSE(weakly_decreasing({4.0, 4.3, 1.0}));
  EXPECT_FALSE(weakly_decreasing({4.0, 4.1, 3.0, 3.1}));
  EXPECT_FALSE(weakly_decreasing({1.0, 1.0}));
  EXPECT_FALSE(weakly_decreasing({1.0}));
}

TEST(Limit, GroundStatesApproachTheWholeSpaceProfile) {
  LimitOptions opt;
  opt.exterior.M = 1000;
  opt.wholespace_M = 1000;
  const LimitReport r = limit_check(2, 3.0, {0.5, 0.25, 0.125}, opt);
  EXPECT_NEAR(r.U0, oracle::shooting_ground_state_value(2, 3.0), 1e-2);
  EXPECT_TRUE(r.u_decreasing);
  EXPECT_TRUE(r.tau_bounded);
  EXPECT_TRUE(r.Z_positive);
  EXPECT_TRUE(r.Z_tail_monotone);
  EXPECT_LT(r.tau_wholespace, 0.0);
  const auto reports = limit_reports(r);
  ASSERT_EQ(reports.size(), 4u);
  EXPECT_EQ(reports[0].pass, r.u_decreasing);
  EXPECT_EQ(reports[1].pass, r.z_decreasing);
  EXPECT_THROW(limit_check(2, 3.0, {0.5, 0.7}, opt), InvalidArgument);
  EXPECT_THROW(limit_check(2, 3.0, {1.5, 0.7}, opt), InvalidArgument);
}
