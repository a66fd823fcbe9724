#include <gtest/gtest.h>

#include <cmath>

#include "ebl/perturbed.hpp"
#include "ebl/spectrum.hpp"
#include "ebl/steklov.hpp"

using namespace ebl;

namespace {

const GroupSpec& d2() {
  static const GroupSpec g = GroupSpec::dihedral(2);
  return g;
}

double lambda_star() {
  static const double ls = [] {
    BifurcateOptions opt;
    opt.sigma_samples = 0;
    return bifurcate(2, 3.0, GridPolicy{}, d2(), opt).lambda_star;
  }();
  return ls;
}

// away from the kernel, where F is O(eps)
const GroundStateSample& off_kernel() {
  static const GroundStateSample s = ground_state_at(2, 3.0, 1.2 * lambda_star(), GridPolicy{});
  return s;
}

DefectField solve_defect(const GroundStateSample& s, std::vector<double> v, int K = 8) {
  auto disc = std::make_shared<const MappedDisc>(s.grid, 2, std::move(v), K);
  return defect(s.params, solve_perturbed_dirichlet(s.params, disc, s.u));
}

}  // namespace

TEST(MappedDisc, CollocationAndTable) {
  const auto& s = off_kernel();
  const MappedDisc disc(s.grid, 2, single_mode_perturbation(8, 0.01), 8);
  EXPECT_EQ(disc.L(), 36);
  EXPECT_DOUBLE_EQ(disc.omega(), 1.0 / 36);
  for (int l = 0; l < disc.L(); ++l) {
    EXPECT_NEAR(disc.theta()[l] + disc.theta()[disc.L() - 1 - l], std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(disc.v(l), 0.01 * std::cos(2.0 * disc.theta()[l]), 1e-15);
  }
}

TEST(MappedDisc, RejectsFoldedMappings) {
  const auto& s = off_kernel();
  // t chi'(t) reaches about -10 inside the cutoff band, so eps ~ 0.1 folds the map
  EXPECT_THROW(MappedDisc(s.grid, 2, single_mode_perturbation(8, 0.2), 8), InadmissibleMapping);
  EXPECT_NO_THROW(MappedDisc(s.grid, 2, single_mode_perturbation(8, 0.05), 8));
  EXPECT_THROW(MappedDisc(s.grid, 2, {0.0, std::nan("")}, 8), InvalidArgument);
}

TEST(Cutoff, SmoothStep) {
  const Cutoff chi;
  EXPECT_EQ(chi.value(1.0), 1.0);
  EXPECT_EQ(chi.value(1.25), 1.0);
  EXPECT_EQ(chi.value(1.5), 0.0);
  EXPECT_EQ(chi.derivative(1.1), 0.0);
  const double h = 1e-6;
  for (double t : {1.3, 1.375, 1.45}) EXPECT_NEAR(chi.derivative(t), (chi.value(t + h) - chi.value(t - h)) / (2 * h), 1e-7);
}

TEST(PerturbedDirichlet, UnperturbedDiscIsTheRadialSolution) {
  const auto& s = off_kernel();
  auto disc = std::make_shared<const MappedDisc>(s.grid, 2, std::vector<double>(9, 0.0), 8);
  const PerturbedSolution sol = solve_perturbed_dirichlet(s.params, disc, s.u);
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    ASSERT_NEAR(sol.U(j, 0), s.u.values[j], 1e-10) << j;
    for (int m = 1; m <= 8; ++m) ASSERT_NEAR(sol.U(j, m), 0.0, 1e-10);
  }
  const DefectField F = defect(s.params, sol);
  for (double f : F.values) EXPECT_LT(std::abs(f), 1e-9);
  // normal into the hole: d_nu u = -u'(1)
  EXPECT_NEAR(F.boundary_mean, -s.u.boundary_slope, 1e-6 * s.u.boundary_slope);
}

TEST(Defect, WeightedMeanVanishesAndCoefficientsReproduceValues) {
  const auto& s = off_kernel();
  for (double eps : {1e-2, 2.5e-3}) {
    std::vector<double> v(9, 0.0);
    v[1] = eps;
    v[2] = 0.4 * eps;
    const DefectField F = solve_defect(s, v);
    EXPECT_LT(std::abs(F.weighted_mean), 1e-12) << eps;
    for (std::size_t l = 0; l < F.theta.size(); ++l) EXPECT_NEAR(F.evaluate(2, F.theta[l]), F.values[l], 1e-9);
  }
}

TEST(Defect, ReflectionEquivariance) {
  // theta -> pi/2 - theta flips cos(2 m theta) by (-1)^m
  const auto& s = off_kernel();
  const double eps = 5e-3;
  const DefectField F = solve_defect(s, {0.0, eps, 0.4 * eps, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const DefectField G = solve_defect(s, {0.0, -eps, 0.4 * eps, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  for (int m = 0; m <= 8; ++m) EXPECT_NEAR(G.coeffs[m], (m % 2 ? -1.0 : 1.0) * F.coeffs[m], 1e-12) << m;
}

TEST(Defect, MeanNormalDerivativeIsQuadraticInEpsilon) {
  const auto& s = off_kernel();
  std::vector<double> rel;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    const DefectField F = solve_defect(s, single_mode_perturbation(8, eps));
    rel.push_back(std::abs(F.boundary_mean + s.u.boundary_slope) / s.u.boundary_slope);
  }
  EXPECT_LT(rel[0], 1e-3);
  EXPECT_GT(rel[0] / rel[1], 3.5);
  EXPECT_GT(rel[1] / rel[2], 3.5);
}

TEST(Linearization, LeadingCoefficientAwayFromTheKernel) {
  const std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
  const DefectReport r = linearization_check(2, 3.0, 1.2 * lambda_star(), GridPolicy{}, d2(), eps);
  EXPECT_GT(r.sigma, 0.0);
  EXPECT_GE(r.observed_order, 1.8);
  const double lin = -r.boundary_slope * r.sigma;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    // the 2D and 1D discretizations of the linear term agree to ~5e-4 relative
    EXPECT_NEAR(r.leading_coeffs[i], eps[i] * lin, 2e-3 * eps[i] * std::abs(lin) + 0.05 * eps[i] * eps[i]) << eps[i];
    EXPECT_NEAR(r.defect_norms[i] / eps[i], std::sqrt(std::numbers::pi) * std::abs(lin),
                0.05 * std::abs(lin));
    EXPECT_LT(r.residuals[i], 1e-9);
  }
}

TEST(Linearization, InsensitiveToModeCountAndCutoff) {
  const double lam = 1.2 * lambda_star();
  const std::vector<double> eps{1e-2, 5e-3};
  const DefectReport base = linearization_check(2, 3.0, lam, GridPolicy{}, d2(), eps);
  DefectOptions k16;
  k16.K = 16;
  DefectOptions wide;
  wide.cutoff = Cutoff{1.1, 1.8};
  for (const DefectOptions& o : {k16, wide}) {
    const DefectReport r = linearization_check(2, 3.0, lam, GridPolicy{}, d2(), eps, o);
    for (std::size_t i = 0; i < eps.size(); ++i)
      EXPECT_LT(std::abs(r.defect_norms[i] - base.defect_norms[i]) / base.defect_norms[i], 1e-3) << o.K;
  }
}

TEST(Linearization, KernelDefectIsSuperlinearForSmallEpsilon) {
  // at Lambda* the Dirichlet mode-i1 operator is nearly singular too (tau ~ 2e-4),
  // so |F|/eps only enters its asymptotic regime below eps ~ 1e-3
  const DefectReport r = linearization_check(2, 3.0, lambda_star(), GridPolicy{}, d2(), {5e-4, 2.5e-4, 1.25e-4});
  EXPECT_LT(std::abs(r.sigma), 1e-6);
  for (double ratio : r.norm_ratios) EXPECT_GE(ratio, 1.8);
}

TEST(Linearization, RejectsBadLadders) {
  EXPECT_THROW(linearization_check(2, 3.0, 500.0, GridPolicy{500}, d2(), {1e-2}), InvalidArgument);
  EXPECT_THROW(linearization_check(2, 3.0, 500.0, GridPolicy{500}, d2(), {1e-3, 1e-2}), InvalidArgument);
  EXPECT_THROW(linearization_check(3, 3.0, 500.0, GridPolicy{500}, GroupSpec::product_orthogonal(3, 1), {1e-2, 5e-3}),
               InvalidArgument);
}
