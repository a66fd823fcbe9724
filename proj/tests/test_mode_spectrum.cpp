#include <gtest/gtest.h>

#include <cmath>

#include "ebl/radial.hpp"
#include "ebl/spectrum.hpp"
#include "oracles.hpp"

using namespace ebl;

namespace {

GroundStateSample sample(int N, double p, double lambda, int M = 2000) {
  GridPolicy policy;
  policy.M = M;
  return ground_state_at(N, p, lambda, policy);
}

double weighted_l2_squared(const RadialGrid& g, std::span<const double> phi) {
  double acc = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) acc += g.weights()[j] * phi[j] * phi[j];
  return acc;
}

}  // namespace

TEST(GroupSpec, AngularEigenvalues) {
  EXPECT_EQ(GroupSpec::product_orthogonal(2, 1).mu(2), 4.0);
  EXPECT_EQ(GroupSpec::product_orthogonal(3, 1).mu(2), 6.0);  // k (k + N - 2)
  const GroupSpec d3 = GroupSpec::dihedral(3);
  EXPECT_EQ(d3.i1(), 3);
  EXPECT_EQ(d3.m1(), 1);
  double prev = -1.0;
  for (int k : d3.mode_indices()) {
    EXPECT_GT(d3.mu(k), prev);
    prev = d3.mu(k);
  }
}

TEST(GroupSpec, HypothesisGate) {
  EXPECT_THROW(GroupSpec::custom(2, {1, 2}, {1, 1}), InvalidArgument);   // i1 = 1
  EXPECT_THROW(GroupSpec::custom(3, {2, 4}, {2, 1}), InvalidArgument);   // m1 even
  EXPECT_NO_THROW(GroupSpec::custom(3, {2, 4}, {1, 1}));
  EXPECT_THROW(GroupSpec::parse("dihedral(3)", 3), InvalidArgument);
  EXPECT_EQ(GroupSpec::parse("custom(2:1,4:3)", 3).mode_indices().back(), 4);
  EXPECT_EQ(GroupSpec::parse("octahedral", 3).i1(), 4);
}

TEST(ModeOperator, RejectsModesOutsideTheGroup) {
  const auto s = sample(2, 3.0, 1.0, 200);
  EXPECT_THROW(assemble_mode_operator(s.params, s.grid, s.u, 3, GroupSpec::dihedral(2)), InvalidArgument);
  EXPECT_NO_THROW(assemble_mode_operator(s.params, s.grid, s.u, 4, GroupSpec::dihedral(2)));
}

TEST(ModeOperator, ModeZeroIsTheKappaOperator) {
  const auto s = sample(3, 2.0, 2.0, 400);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 0, GroupSpec::product_orthogonal(3, 1));
  const auto c = linearized_potential(s.u, 2.0, 2.0, 0.0);
  ASSERT_EQ(op.potential().size(), c.size());
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_EQ(op.potential()[j], c[j]);
  EXPECT_EQ(op.mu, 0.0);
}

TEST(ModeOperator, FarFieldPotential) {
  const auto s = sample(2, 3.0, 4.0);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 2, GroupSpec::dihedral(2));
  const double rmax = s.grid->r_max();
  EXPECT_NEAR(op.potential().back(), 1.0 + 4.0 * 4.0 / (rmax * rmax), 1e-12);
}

TEST(BottomEigenpairs, RadialMorseIndexOne) {
  for (int N : {2, 3})
    for (double lambda : {0.5, 1.0, 4.0, 25.0}) {
      const auto lin = radial_linearization(sample(N, 3.0, lambda));
      EXPECT_LT(lin.tau0, 0.0) << N << " " << lambda;
      EXPECT_GT(lin.tau1, 0.0) << N << " " << lambda;
    }
}

TEST(BottomEigenpairs, ResidualAndSignOfTheGroundMode) {
  const auto s = sample(2, 3.0, 1.0);
  const ModeOperator op = mode_operator_from_potential(s.params, s.grid, 0,
                                                       linearized_potential(s.u, 3.0, 1.0, 0.0));
  const auto pairs = bottom_eigenpairs(op, 3);
  ASSERT_EQ(pairs.size(), 3u);
  for (const auto& e : pairs) EXPECT_LT(e.residual, 1e-9) << e.index;
  const auto& z = pairs[0].phi.values;
  for (std::size_t j = 1; j < z.size(); ++j) EXPECT_GE(z[j], 0.0) << j;
  for (std::size_t a = 0; a < pairs.size(); ++a)
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j)
        dot += s.grid->weights()[j] * pairs[a].phi.values[j] * pairs[b].phi.values[j];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-9);
    }
}

TEST(BottomEigenpairs, FreeOperatorIsBoundedBelowByOne) {
  const auto s = sample(2, 3.0, 4.0, 500);
  for (int k : {0, 2, 4}) {
    std::vector<double> c(s.grid->size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = 1.0 + 4.0 * angular_eigenvalue(k, 2) / std::pow(s.grid->node(j), 2);
    const ModeOperator op = mode_operator_from_potential(s.params, s.grid, k, c);
    for (const auto& e : bottom_eigenpairs(op, 5)) EXPECT_GE(e.tau, 1.0 - 1e-10) << k;
  }
}

TEST(BottomEigenpairs, CoarseGridAgainstDenseSolver) {
  const auto s = sample(2, 3.0, 1.0, 64);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 2, GroupSpec::dihedral(2));
  const auto dense = oracle::dense_eigenvalues(op.op);
  const auto pairs = bottom_eigenpairs(op, static_cast<int>(dense.size()));
  ASSERT_EQ(pairs.size(), dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i)
    EXPECT_LT(std::abs(pairs[i].tau - dense[i]), 1e-10 * std::max(1.0, std::abs(dense[i]))) << i;
}

TEST(QuadraticForm, EigenvalueIdentity) {
  const auto s = sample(2, 3.0, 1.0);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 0, GroupSpec::dihedral(2));
  const auto lin = radial_linearization(s);
  const double q = quadratic_form(op, lin.z, false);
  const double l2 = weighted_l2_squared(*s.grid, lin.z.values);
  EXPECT_LT(std::abs(q - lin.tau0 * l2) / std::abs(lin.tau0 * l2), 1e-8);
}

TEST(QuadraticForm, BoundaryTermDifference) {
  const auto s = sample(3, 2.0, 2.0, 300);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 2, GroupSpec::product_orthogonal(3, 1));
  std::vector<double> phi(s.grid->size());
  for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = std::exp(-(s.grid->node(j) - 1.0));
  const double gap = quadratic_form(op, phi, false) - quadratic_form(op, phi, true);
  EXPECT_DOUBLE_EQ(gap, 2.0 * 2.0 * phi[0] * phi[0]);
}

TEST(QuadraticForm, MatchesTheMatrixOnInteriorProfiles) {
  const auto s = sample(2, 3.0, 4.0, 800);
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, 2, GroupSpec::dihedral(2));
  std::vector<double> phi(s.grid->size());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double x = s.grid->node(j) - 1.0;
    phi[j] = x * std::exp(-x) * std::sin(0.7 * x);
  }
  phi.back() = 0.0;
  const auto Aphi = op.op.apply_full(phi);
  double ip = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) ip += Aphi[j] * phi[j];
  const double q = quadratic_form(op, phi, false);
  EXPECT_LT(std::abs(q - ip) / std::abs(ip), 1e-12);
}

TEST(QuadraticForm, ContinuumValueOfAFreeProfile) {
  // phi = x e^{-x}, x = r - 1, against the continuum integral of the free mode-2 form
  const double lambda = 1.0, mu = 4.0;
  auto phi = [](double r) { return (r - 1.0) * std::exp(1.0 - r); };
  auto dphi = [](double r) { return (2.0 - r) * std::exp(1.0 - r); };
  auto integrand = [&](double r) {
    return (lambda * dphi(r) * dphi(r) + (1.0 + lambda * mu / (r * r)) * phi(r) * phi(r)) * r;
  };
  const double exact = oracle::adaptive_simpson(integrand, 1.0, 41.0, 1e-13);
  const auto params = ProblemParams::from_lambda(2, 3.0, lambda);
  std::vector<double> errs;
  for (int M : {500, 1000, 2000}) {
    auto g = make_grid(params, GridPolicy{M});
    std::vector<double> c(g->size()), v(g->size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      c[j] = 1.0 + lambda * mu / std::pow(g->node(j), 2);
      v[j] = phi(g->node(j));
    }
    const ModeOperator op = mode_operator_from_potential(params, g, 2, c);
    errs.push_back(std::abs(quadratic_form(op, v, false) - exact) / exact);
  }
  EXPECT_LT(errs.back(), 1e-5);
  EXPECT_GT(errs[0] / errs[1], 3.0);
  EXPECT_GT(errs[1] / errs[2], 3.0);
}

TEST(QuadraticForm, GroundStateWitnessBelowThreshold) {
  // psi = u at mode i1 is negative below (p-1)/mu_{i1} = 0.5
  for (double lambda : {0.2, 0.3, 0.45}) {
    const auto s = sample(2, 3.0, lambda);
    const GroupSpec g = GroupSpec::dihedral(2);
    const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, g.i1(), g);
    const double q = quadratic_form(op, s.u, false);
    const double bound = (1.0 - 3.0 + lambda * 4.0) * weighted_l2_squared(*s.grid, s.u.values);
    EXPECT_LE(q, bound + 1e-8) << lambda;
    EXPECT_LT(q, 0.0) << lambda;
  }
}

TEST(ModeOrdering, BottomEigenvaluesIncreaseWithMu) {
  const GroupSpec g = GroupSpec::dihedral(2);
  for (double lambda : {1.0, 100.0, 424.0}) {
    const auto s = sample(2, 3.0, lambda, 1000);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k : {2, 4, 6, 8}) {
      const double t = tau_min(s, k, g);
      EXPECT_GT(t, prev) << lambda << " " << k;
      prev = t;
    }
  }
}

TEST(Lambda0, AboveTheWitnessThresholdAndGridStable) {
  const GroupSpec g = GroupSpec::dihedral(2);
  const Lambda0Result coarse = locate_lambda0(2, 3.0, GridPolicy{1000}, g, 380.0, 470.0, 1e-3);
  const Lambda0Result fine = locate_lambda0(2, 3.0, GridPolicy{2000}, g, 380.0, 470.0, 1e-3);
  EXPECT_GE(fine.lambda0, 0.5 - 1e-3);
  EXPECT_LT(std::abs(coarse.lambda0 - fine.lambda0) / fine.lambda0, 0.01);
  EXPECT_TRUE(fine.higher_modes_nonbinding);
  EXPECT_NEAR(fine.lambda0, 424.09, 0.5);
}

TEST(Lambda0, NoBracketWhenTheSignDoesNotChange) {
  const GroupSpec g = GroupSpec::dihedral(2);
  EXPECT_THROW(locate_lambda0(2, 3.0, GridPolicy{500}, g, 1.0, 2.0, 1e-3), NoBracket);
  EXPECT_THROW(locate_lambda0(2, 3.0, GridPolicy{500}, g, 2.0, 1.0, 1e-3), InvalidArgument);
}

TEST(Lambda0, ThresholdHoldsAcrossExponentsAndGroups) {
  struct Case {
    int N;
    double p;
    GroupSpec g;
  };
  const std::vector<Case> cases = {{2, 2.0, GroupSpec::dihedral(2)},
                                   {2, 3.0, GroupSpec::dihedral(3)},
                                   {3, 2.0, GroupSpec::product_orthogonal(3, 1)}};
  for (const auto& c : cases) {
    const GridPolicy policy{1000};
    const auto [lo, hi] = scan_lambda0_bracket(c.N, c.p, policy, c.g);
    const Lambda0Result r = locate_lambda0(c.N, c.p, policy, c.g, lo, hi, 1e-2);
    EXPECT_GE(r.lambda0, (c.p - 1.0) / c.g.mu(c.g.i1()) - 1e-2) << c.g.name();
    for (const auto& [lam, t] : r.samples)
      if (lam < r.lambda0 - 1e-2) EXPECT_LE(t, 0.0) << lam;
  }
}
