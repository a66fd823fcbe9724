#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ebl/grid.hpp"
#include "ebl/operator.hpp"
#include "ebl/params.hpp"
#include "ebl/quadrature.hpp"
#include "ebl/spectrum.hpp"
#include "oracles.hpp"

using namespace ebl;

namespace {

GridPtr grid_for(int N, double lambda, int M, double stretch = 2.0, double factor = 40.0,
                 Closure closure = Closure::robin) {
  return std::make_shared<const RadialGrid>(
      build_grid(ProblemParams::from_lambda(N, 1.5, lambda), M, stretch, factor, closure));
}

// max over nodes in [1.05, 6] of |W^-1 A phi - L phi| for a smooth phi
template <typename Phi, typename Exact>
double consistency_error(const GridPtr& g, double lambda, double c, Phi phi, Exact exact) {
  std::vector<double> x(g->size()), pot(g->size(), c);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = phi(g->node(j));
  const DivergenceOperator op(g, lambda, pot);
  const auto y = op.action(x);
  double err = 0.0;
  for (std::size_t j = 1; j + 1 < x.size(); ++j) {
    const double r = g->node(j);
    if (r < 1.05 || r > 6.0) continue;
    err = std::max(err, std::abs(y[j] - exact(r)));
  }
  return err;
}

}  // namespace

TEST(GaussLegendre, ExactForDegree2nMinus1) {
  for (int n : {1, 2, 4, 8}) {
    const GaussRule rule = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      const double got = integrate(rule, 0.0, 2.0, [&](double x) { return std::pow(x, deg); });
      EXPECT_NEAR(got, std::pow(2.0, deg + 1) / (deg + 1), 1e-12 * std::pow(2.0, deg + 1)) << "n=" << n;
    }
  }
}

TEST(BuildGrid, UniformWhenStretchIsOne) {
  const GridPtr g = grid_for(2, 1.0, 16, 1.0, 40.0);
  ASSERT_EQ(g->size(), 17u);
  EXPECT_EQ(g->r_min(), 1.0);
  EXPECT_DOUBLE_EQ(g->r_max(), 41.0);
  for (std::size_t j = 0; j + 1 < g->size(); ++j) EXPECT_NEAR(g->spacing(j), 2.5, 1e-12);
}

TEST(BuildGrid, OuterRadiusAndMassOfRSquared) {
  const GridPtr g = grid_for(3, 4.0, 2000);
  EXPECT_DOUBLE_EQ(g->r_max(), 81.0);
  const double exact = (81.0 * 81.0 * 81.0 - 1.0) / 3.0;
  for (auto weights : {g->weights(), g->quadrature_weights()}) {
    double mass = 0.0;
    for (double w : weights) {
      EXPECT_GT(w, 0.0);
      mass += w;
    }
    EXPECT_LT(std::abs(mass - exact) / exact, 1e-10);
    EXPECT_LT(std::abs(mass - exact) / exact, 10.0 * std::numeric_limits<double>::epsilon() * 2000);
  }
}

TEST(BuildGrid, ExponentialAgainstAdaptiveQuadrature) {
  const GridPtr g = grid_for(2, 1.0, 2000);
  std::vector<double> f(g->size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::exp(-2.0 * (g->node(j) - 1.0));
  const double ref = oracle::adaptive_simpson([](double r) { return std::exp(-2.0 * (r - 1.0)) * r; }, 1.0,
                                              g->r_max(), 1e-12);
  EXPECT_LT(std::abs(g->integrate(f) - ref) / ref, 1e-6);
}

TEST(BuildGrid, LinearPolynomialsIntegrateExactly) {
  for (int N : {2, 3, 4}) {
    const GridPtr g = grid_for(N, 2.0, 37, 2.0, 5.0);
    std::vector<double> f(g->size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = 3.0 - 0.5 * g->node(j);
    const double b = g->r_max();
    auto prim = [&](double r) { return 3.0 * std::pow(r, N) / N - 0.5 * std::pow(r, N + 1) / (N + 1); };
    const double exact = prim(b) - prim(1.0);
    EXPECT_NEAR(g->integrate(f), exact, 1e-12 * std::abs(prim(b)));
    double lumped = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) lumped += g->weights()[j] * f[j];
    EXPECT_NEAR(lumped, exact, 1e-12 * std::abs(prim(b)));
  }
}

TEST(BuildGrid, GradedAndNested) {
  const GridPtr coarse = grid_for(2, 1.0, 500), fine = grid_for(2, 1.0, 1000);
  EXPECT_LT(coarse->spacing(0), coarse->spacing(coarse->size() - 2));
  for (std::size_t j = 0; j < coarse->size(); ++j) EXPECT_NEAR(fine->node(2 * j), coarse->node(j), 1e-12);
  for (std::size_t j = 0; j + 1 < coarse->size(); ++j) {
    const double ratio = fine->spacing(2 * j) / coarse->spacing(j);
    EXPECT_GT(ratio, 0.2);
    EXPECT_LT(ratio, 0.55);
  }
}

TEST(BuildGrid, RejectsBadPolicies) {
  const auto params = ProblemParams::from_lambda(2, 3.0, 1.0);
  EXPECT_THROW(build_grid(params, 15, 2.0, 40.0), InvalidArgument);
  EXPECT_THROW(build_grid(params, 100, 0.5, 40.0), InvalidArgument);
  EXPECT_THROW(build_grid(params, 100, 2.0, 0.0), InvalidArgument);
  EXPECT_THROW(build_grid(params, 100, std::numeric_limits<double>::quiet_NaN(), 40.0), InvalidArgument);
  EXPECT_THROW(build_grid(params, 100, 2.0, std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(ProblemParams, LambdaAndRadiusAgree) {
  const auto a = ProblemParams::from_radius(2, 3.0, 0.5);
  EXPECT_EQ(a.lambda, 4.0);
  const auto b = ProblemParams::from_lambda(3, 2.0, 25.0);
  EXPECT_DOUBLE_EQ(b.R, 0.2);
  EXPECT_THROW(ProblemParams::from_lambda(3, 5.0, 1.0), InvalidArgument);
  EXPECT_THROW(ProblemParams::from_lambda(2, 1.0, 1.0), InvalidArgument);
  ProblemParams bad{2, 3.0, 1.0, 2.0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(DivergenceOperator, ConstantsSeeOnlyThePotential) {
  const GridPtr g = grid_for(2, 1.0, 200, 2.0, 40.0, Closure::dirichlet);
  const DivergenceOperator op(g, 1.0, std::vector<double>(g->size(), 1.0));
  const std::vector<double> ones(g->size(), 1.0);
  const auto y = op.apply_full(ones);
  const auto w = g->weights();
  for (std::size_t j = 1; j + 1 < y.size(); ++j) EXPECT_NEAR(y[j], w[j], 1e-12 * w[j]);
}

TEST(DivergenceOperator, Tridiagonal) {
  const GridPtr g = grid_for(3, 2.0, 64);
  const DivergenceOperator op(g, 2.0, std::vector<double>(g->size(), 0.3));
  std::vector<double> e(g->size(), 0.0);
  e[20] = 1.0;
  const auto y = op.apply_full(e);
  for (std::size_t j = 0; j < y.size(); ++j)
    if (j + 1 < 20 || j > 21) EXPECT_EQ(y[j], 0.0) << j;
}

TEST(DivergenceOperator, RejectsNonFinitePotential) {
  const GridPtr g = grid_for(2, 1.0, 64);
  std::vector<double> c(g->size(), 1.0);
  c[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DivergenceOperator(g, 1.0, c), InvalidArgument);
}

TEST(DivergenceOperator, WeightedSymmetry) {
  const GridPtr g = grid_for(3, 4.0, 300);
  std::vector<double> c(g->size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = 1.0 + std::sin(g->node(j));
  const DivergenceOperator op(g, 4.0, c);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<double> x(g->size()), y(g->size());
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = nd(rng), y[j] = nd(rng);
    const auto ax = op.action(x), ay = op.action(y);
    const auto w = g->weights();
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      lhs += w[j] * ax[j] * y[j];
      rhs += w[j] * x[j] * ay[j];
      scale += w[j] * std::abs(ax[j] * y[j]);
    }
    EXPECT_LT(std::abs(lhs - rhs) / scale, 1e-13);
  }
}

TEST(DivergenceOperator, YukawaProfileInThreeDimensions) {
  // -Delta phi + phi = 0 for phi = e^{1-r}/r
  auto phi = [](double r) { return std::exp(1.0 - r) / r; };
  auto zero = [](double) { return 0.0; };
  std::vector<double> errs;
  for (int M : {500, 1000, 2000}) errs.push_back(consistency_error(grid_for(3, 1.0, M), 1.0, 1.0, phi, zero));
  EXPECT_LT(errs.back(), 1e-3);
  EXPECT_GT(errs[0] / errs[1], 3.2);
  EXPECT_GT(errs[1] / errs[2], 3.2);
}

TEST(DivergenceOperator, SecondOrderConsistency) {
  // compactly supported bump on (1.5, 5.5), N = 2, lambda = 2, c = 0.7
  const double lambda = 2.0, c = 0.7;
  auto phi = [](double r) {
    const double s = (r - 3.5) / 2.0;
    return std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 4) : 0.0;
  };
  auto exact = [&](double r) {
    const double s = (r - 3.5) / 2.0;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    const double d1 = 4.0 * std::pow(q, 3) * (-2.0 * s) / 2.0;
    const double d2 = (12.0 * q * q * 4.0 * s * s - 8.0 * std::pow(q, 3)) / 4.0;
    return -lambda * (d2 + d1 / r) + c * phi(r);
  };
  std::vector<double> errs;
  for (int M : {400, 800, 1600}) errs.push_back(consistency_error(grid_for(2, 1.0, M, 1.0, 8.0), lambda, c, phi, exact));
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    EXPECT_GT(ratio, 4.0 * 0.8);
    EXPECT_LT(ratio, 4.0 * 1.2);
  }
}

TEST(DivergenceOperator, FreeOperatorMatchesDenseEigensolver) {
  const GridPtr g = grid_for(2, 1.0, 64);
  const DivergenceOperator op(g, 1.0, std::vector<double>(g->size(), 0.0));
  const auto dense = oracle::dense_eigenvalues(op);
  const auto pairs = bottom_eigenpairs(op, static_cast<int>(dense.size()));
  ASSERT_EQ(pairs.size(), dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i)
    EXPECT_LT(std::abs(pairs[i].tau - dense[i]), 1e-10 * std::max(1.0, std::abs(dense[i]))) << i;
}
