#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "ebl/errors.hpp"
#include "ebl/grid.hpp"
#include "ebl/group.hpp"
#include "ebl/operator.hpp"
#include "ebl/params.hpp"
#include "ebl/radial.hpp"
#include "ebl/spectrum.hpp"
#include "ebl/steklov.hpp"

namespace ebl {

/// Smooth cutoff: 1 for t <= t_in, 0 for t >= t_out, quintic blend between
/// (value and two derivatives matched at both ends).
struct Cutoff {
  double t_in = 1.25;
  double t_out = 1.5;

  double value(double t) const {
    if (t <= t_in) return 1.0;
    if (t >= t_out) return 0.0;
    const double s = (t - t_in) / (t_out - t_in);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  }
  double derivative(double t) const {
    if (t <= t_in || t >= t_out) return 0.0;
    const double s = (t - t_in) / (t_out - t_in);
    return -30.0 * s * s * (1.0 - s) * (1.0 - s) / (t_out - t_in);
  }
};

/// Exterior of B_{1+v} (N = 2) pulled back to t in [1, r_max] by
/// r = t (1 + chi(t) v(theta)), v = sum_m v_m cos(m i1 theta).
/// Angular discretization: cosine modes m i1, m = 0..K, with a midpoint rule
/// of L points on the symmetry cell [0, pi/i1].
class MappedDisc {
 public:
  MappedDisc(GridPtr grid, int i1, std::vector<double> v_coeffs, int K, Cutoff chi = {}, int L = 0)
      : grid_(std::move(grid)), i1_(i1), K_(K), chi_(chi), v_(std::move(v_coeffs)) {
    require(grid_ != nullptr && grid_->dimension() == 2, "mapped disc needs a two-dimensional radial grid");
    require(grid_->r_min() == 1.0, "mapped disc grid must start at t = 1");
    require(i1_ >= 1 && K_ >= 1, "mapped disc needs i1 >= 1 and K >= 1");
    require(chi_.t_in > 1.0 && chi_.t_out > chi_.t_in && chi_.t_out < grid_->r_max(), "invalid cutoff interval");
    v_.resize(K_ + 1, 0.0);
    for (double c : v_) require(std::isfinite(c), "perturbation coefficients must be finite");
    L_ = L > 0 ? L : 4 * (K_ + 1);
    require(L_ > 2 * K_, "angular rule too coarse for the mode set");
    theta_.resize(L_);
    for (int l = 0; l < L_; ++l) theta_[l] = (l + 0.5) * std::numbers::pi / (i1_ * L_);
    C_.resize(L_, K_ + 1);
    S_.resize(L_, K_ + 1);
    for (int l = 0; l < L_; ++l)
      for (int m = 0; m <= K_; ++m) {
        const double a = m * i1_ * theta_[l];
        C_(l, m) = std::cos(a);
        S_(l, m) = -m * i1_ * std::sin(a);
      }
    vtheta_.assign(L_, 0.0);
    dvtheta_.assign(L_, 0.0);
    for (int l = 0; l < L_; ++l)
      for (int m = 0; m <= K_; ++m) {
        vtheta_[l] += v_[m] * C_(l, m);
        dvtheta_[l] += v_[m] * S_(l, m);
      }
    build_metric();
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int i1() const { return i1_; }
  int K() const { return K_; }
  int L() const { return L_; }
  const Cutoff& cutoff() const { return chi_; }
  const std::vector<double>& v_coeffs() const { return v_; }
  const std::vector<double>& theta() const { return theta_; }
  const Eigen::MatrixXd& cos_table() const { return C_; }
  const Eigen::MatrixXd& dcos_table() const { return S_; }
  double v(int l) const { return vtheta_[l]; }
  double dv(int l) const { return dvtheta_[l]; }
  /// Angular average weight per collocation point.
  double omega() const { return 1.0 / L_; }
  /// Average of cos^2(m i1 theta) over the cell.
  static double mode_norm(int m) { return m == 0 ? 1.0 : 0.5; }

  // metric tables: nodes (j, l) and cell midpoints (j, l)
  const Eigen::MatrixXd& node_a_thth() const { return a_thth_; }  // R_t / R
  const Eigen::MatrixXd& node_jac() const { return jac_; }        // R R_t
  const Eigen::MatrixXd& cell_f_tt() const { return f_tt_; }      // R (1 + (R_th/R)^2) / (R_t t)
  const Eigen::MatrixXd& cell_b_tth() const { return b_tth_; }    // -R_th / R

  /// v evaluated at arbitrary theta.
  double v_at(double th) const {
    double acc = 0.0;
    for (int m = 0; m <= K_; ++m) acc += v_[m] * std::cos(m * i1_ * th);
    return acc;
  }
  double dv_at(double th) const {
    double acc = 0.0;
    for (int m = 0; m <= K_; ++m) acc -= v_[m] * m * i1_ * std::sin(m * i1_ * th);
    return acc;
  }

 private:
  void metric_at(double t, int l, double& R, double& Rt, double& Rth) const {
    const double c = chi_.value(t), dc = chi_.derivative(t);
    R = t * (1.0 + c * vtheta_[l]);
    Rt = 1.0 + c * vtheta_[l] + t * dc * vtheta_[l];
    Rth = t * c * dvtheta_[l];
  }

  void build_metric() {
    const std::size_t n = grid_->size();
    a_thth_.resize(n, L_);
    jac_.resize(n, L_);
    f_tt_.resize(n - 1, L_);
    b_tth_.resize(n - 1, L_);
    for (int l = 0; l < L_; ++l) {
      for (std::size_t j = 0; j < n; ++j) {
        double R, Rt, Rth;
        metric_at(grid_->node(j), l, R, Rt, Rth);
        if (!(R > 0.0 && Rt > 0.0))
          throw InadmissibleMapping("mapping folds at t = " + std::to_string(grid_->node(j)));
        a_thth_(j, l) = Rt / R;
        jac_(j, l) = R * Rt;
      }
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const double t = 0.5 * (grid_->node(j) + grid_->node(j + 1));
        double R, Rt, Rth;
        metric_at(t, l, R, Rt, Rth);
        if (!(R > 0.0 && Rt > 0.0)) throw InadmissibleMapping("mapping folds at t = " + std::to_string(t));
        f_tt_(j, l) = R * (1.0 + (Rth / R) * (Rth / R)) / (Rt * t);
        b_tth_(j, l) = -Rth / R;
      }
    }
  }

  GridPtr grid_;
  int i1_;
  int K_;
  int L_ = 0;
  Cutoff chi_;
  std::vector<double> v_;
  std::vector<double> theta_, vtheta_, dvtheta_;
  Eigen::MatrixXd C_, S_;
  Eigen::MatrixXd a_thth_, jac_, f_tt_, b_tth_;
};

/// v = epsilon cos(i1 theta) in the mode basis.
inline std::vector<double> single_mode_perturbation(int K, double epsilon) {
  std::vector<double> v(K + 1, 0.0);
  v[1] = epsilon;
  return v;
}

/// Pulled-back solution: coefficients U(j, m) of cos(m i1 theta) at node t_j.
struct PerturbedSolution {
  std::shared_ptr<const MappedDisc> disc;
  Eigen::MatrixXd U;
  double residual_norm = 0.0;
  int iterations = 0;
  Eigen::VectorXd reaction;  // dE/dU(0, m): boundary reaction moments

  /// u(t_j, theta_l) on all nodes and collocation angles.
  Eigen::MatrixXd nodal() const { return U * disc->cos_table().transpose(); }
};

namespace detail {

/// Block tridiagonal constant part of the pulled-back energy Hessian.
struct BlockQuadratic {
  std::vector<Eigen::MatrixXd> diag;  // node j with itself
  std::vector<Eigen::MatrixXd> off;   // node j with node j+1
};

inline BlockQuadratic assemble_mapped_quadratic(const MappedDisc& disc, double lambda) {
  const RadialGrid& g = disc.grid();
  const std::size_t n = g.size();
  const int nb = disc.K() + 1;
  const auto w = g.weights();
  const auto meas = g.cell_measure();
  const Eigen::MatrixXd& C = disc.cos_table();
  const Eigen::MatrixXd& S = disc.dcos_table();
  const double om = disc.omega();
  BlockQuadratic q;
  q.diag.assign(n, Eigen::MatrixXd::Zero(nb, nb));
  q.off.assign(n - 1, Eigen::MatrixXd::Zero(nb, nb));
  Eigen::VectorXd d(2 * nb), s(2 * nb);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = g.spacing(j);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(2 * nb, 2 * nb);
    for (int l = 0; l < disc.L(); ++l) {
      for (int m = 0; m < nb; ++m) {
        d(m) = -C(l, m) / h;
        d(nb + m) = C(l, m) / h;
        s(m) = 0.5 * S(l, m);
        s(nb + m) = 0.5 * S(l, m);
      }
      const double A = om * lambda * meas[j] * disc.cell_f_tt()(j, l);
      const double B = om * lambda * h * disc.cell_b_tth()(j, l);
      local.noalias() += A * d * d.transpose();
      if (B != 0.0) local.noalias() += B * (d * s.transpose() + s * d.transpose());
    }
    q.diag[j] += local.topLeftCorner(nb, nb);
    q.diag[j + 1] += local.bottomRightCorner(nb, nb);
    q.off[j] += local.topRightCorner(nb, nb);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double nu = w[j] / g.node(j);
    for (int l = 0; l < disc.L(); ++l) {
      const Eigen::VectorXd c = C.row(l).transpose(), sv = S.row(l).transpose();
      q.diag[j].noalias() += om * nu * (lambda * disc.node_a_thth()(j, l) * sv * sv.transpose() +
                                        disc.node_jac()(j, l) * c * c.transpose());
    }
  }
  if (g.closure() == Closure::robin) {
    const double rm = g.r_max();
    const double closure = lambda * rm * robin_rate(lambda, 2, rm);
    for (int l = 0; l < disc.L(); ++l) {
      const Eigen::VectorXd c = C.row(l).transpose();
      q.diag[n - 1].noalias() += om * closure * c * c.transpose();
    }
  }
  return q;
}

struct MappedResidual {
  Eigen::MatrixXd G;      // gradient rows per node
  Eigen::MatrixXd upow;   // u_+^{p-1} at (j, l)
  double absolute = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? absolute / scale : absolute; }
};

inline MappedResidual mapped_residual(const MappedDisc& disc, const BlockQuadratic& q, double p,
                                      const Eigen::MatrixXd& U, std::size_t f0, std::size_t f1) {
  const RadialGrid& g = disc.grid();
  const std::size_t n = g.size();
  const int nb = disc.K() + 1;
  const auto w = g.weights();
  const Eigen::MatrixXd& C = disc.cos_table();
  const double om = disc.omega();
  MappedResidual r;
  r.G = Eigen::MatrixXd::Zero(n, nb);
  for (std::size_t j = 0; j < n; ++j) {
    r.G.row(j) += (q.diag[j] * U.row(j).transpose()).transpose();
    if (j + 1 < n) {
      r.G.row(j) += (q.off[j] * U.row(j + 1).transpose()).transpose();
      r.G.row(j + 1) += (q.off[j].transpose() * U.row(j).transpose()).transpose();
    }
  }
  const Eigen::MatrixXd u = U * C.transpose();
  r.upow.resize(n, disc.L());
  Eigen::MatrixXd nl = Eigen::MatrixXd::Zero(n, nb);
  for (std::size_t j = 0; j < n; ++j) {
    const double nu = w[j] / g.node(j);
    for (int l = 0; l < disc.L(); ++l) {
      const double up = std::max(u(j, l), 0.0);
      r.upow(j, l) = up > 0.0 ? std::pow(up, p - 1.0) : 0.0;
      const double f = om * nu * disc.node_jac()(j, l) * r.upow(j, l) * up;
      nl.row(j) += f * C.row(l);
    }
  }
  r.G -= nl;
  double a = 0.0, b = 0.0;
  for (std::size_t j = f0; j < f1; ++j)
    for (int m = 0; m < nb; ++m) {
      const double sc = 1.0 / (w[j] * MappedDisc::mode_norm(m));
      a += r.G(j, m) * r.G(j, m) * sc;
      b += nl(j, m) * nl(j, m) * sc;
    }
  r.absolute = std::sqrt(a);
  r.scale = std::sqrt(b);
  return r;
}

}  // namespace detail

struct PerturbedOptions {
  double tolerance = 1e-10;
  int max_iterations = 40;
  int max_halvings = 30;
};

namespace detail {

inline PerturbedSolution newton_mapped(const ProblemParams& params, std::shared_ptr<const MappedDisc> disc,
                                       Eigen::MatrixXd U, const PerturbedOptions& opt) {
  const RadialGrid& g = disc->grid();
  const std::size_t n = g.size();
  const int nb = disc->K() + 1;
  const std::size_t f0 = 1, f1 = g.closure() == Closure::robin ? n : n - 1;
  const std::size_t nf = f1 - f0;
  const auto w = g.weights();
  const Eigen::MatrixXd& C = disc->cos_table();
  const double om = disc->omega();

  const detail::BlockQuadratic q = detail::assemble_mapped_quadratic(*disc, params.lambda);
  U.row(0).setZero();

  auto index = [&](std::size_t j, int m) { return static_cast<int>((j - f0) * nb + m); };
  detail::MappedResidual res = detail::mapped_residual(*disc, q, params.p, U, f0, f1);
  int it = 0;
  for (; it < opt.max_iterations && !(res.relative() < opt.tolerance); ++it) {
    if (!std::isfinite(res.absolute)) throw ConvergenceFailure("non-finite residual in mapped Newton");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nf * nb * nb * 3);
    for (std::size_t j = f0; j < f1; ++j) {
      Eigen::MatrixXd Hd = q.diag[j];
      const double nu = w[j] / g.node(j);
      for (int l = 0; l < disc->L(); ++l) {
        const double f = om * nu * disc->node_jac()(j, l) * params.p * res.upow(j, l);
        if (f != 0.0) Hd.noalias() -= f * C.row(l).transpose() * C.row(l);
      }
      for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b) trip.emplace_back(index(j, a), index(j, b), Hd(a, b));
      if (j + 1 < f1)
        for (int a = 0; a < nb; ++a)
          for (int b = 0; b < nb; ++b) {
            trip.emplace_back(index(j, a), index(j + 1, b), q.off[j](a, b));
            trip.emplace_back(index(j + 1, b), index(j, a), q.off[j](a, b));
          }
    }
    Eigen::SparseMatrix<double> H(static_cast<int>(nf * nb), static_cast<int>(nf * nb));
    H.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(H);
    if (lu.info() != Eigen::Success) throw ConvergenceFailure("mapped Newton Jacobian factorization failed");
    Eigen::VectorXd rhs(nf * nb);
    for (std::size_t j = f0; j < f1; ++j)
      for (int m = 0; m < nb; ++m) rhs(index(j, m)) = res.G(j, m);
    const Eigen::VectorXd step = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !step.allFinite()) throw ConvergenceFailure("mapped Newton solve failed");
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving) {
      Eigen::MatrixXd trial = U;
      for (std::size_t j = f0; j < f1; ++j)
        for (int m = 0; m < nb; ++m) trial(j, m) -= t * step(index(j, m));
      detail::MappedResidual tr = detail::mapped_residual(*disc, q, params.p, trial, f0, f1);
      if (std::isfinite(tr.absolute) && tr.absolute <= (1.0 - 1e-4 * t) * res.absolute) {
        U.swap(trial);
        res = std::move(tr);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(res.relative() < opt.tolerance))
    throw ConvergenceFailure("mapped Newton did not converge (relative residual " +
                             sci(res.relative()) + ")");
  const Eigen::MatrixXd u = U * C.transpose();
  for (std::size_t j = f0; j < f1; ++j)
    for (int l = 0; l < disc->L(); ++l)
      if (!(u(j, l) > 0.0)) throw ConvergenceFailure("mapped solution is not positive at interior nodes");

  PerturbedSolution sol;
  sol.disc = std::move(disc);
  sol.U = std::move(U);
  sol.residual_norm = res.relative();
  sol.iterations = it;
  sol.reaction = res.G.row(0).transpose();
  return sol;
}

}  // namespace detail

/// Newton solve of the pulled-back semilinear problem with u = 0 at t = 1.
/// Starts from `guess` if given, else from the radial profile; on failure the
/// perturbation is scaled down and continued back up (at most 2^-8).
inline PerturbedSolution solve_perturbed_dirichlet(const ProblemParams& params,
                                                   std::shared_ptr<const MappedDisc> disc,
                                                   const RadialProfile& radial, const PerturbedOptions& opt = {},
                                                   const Eigen::MatrixXd* guess = nullptr) {
  params.validate();
  require(params.N == 2, "perturbed-domain solves are two-dimensional");
  require(disc != nullptr, "mapped disc required");
  const RadialGrid& g = disc->grid();
  require(radial.size() == g.size(), "radial profile is not on the mapped grid");
  const int nb = disc->K() + 1;
  Eigen::MatrixXd U0 = Eigen::MatrixXd::Zero(g.size(), nb);
  for (std::size_t j = 0; j < g.size(); ++j) U0(j, 0) = radial.values[j];
  if (guess != nullptr) {
    require(guess->rows() == U0.rows() && guess->cols() == U0.cols(), "guess has the wrong shape");
    try {
      return detail::newton_mapped(params, disc, *guess, opt);
    } catch (const ConvergenceFailure&) {
    }
  }
  try {
    return detail::newton_mapped(params, disc, U0, opt);
  } catch (const ConvergenceFailure&) {
  }
  // continuation in the perturbation size: s = 2^-d, ..., 1
  for (int depth = 1; depth <= 8; ++depth) {
    try {
      Eigen::MatrixXd prev = U0, cur = U0;
      double s_prev = 0.0, s_pp = 0.0;
      PerturbedSolution sol;
      for (int k = depth; k >= 0; --k) {
        const double s = std::ldexp(1.0, -k);
        std::vector<double> v = disc->v_coeffs();
        for (double& c : v) c *= s;
        auto sub = k == 0 ? disc
                          : std::make_shared<const MappedDisc>(disc->grid_ptr(), disc->i1(), v, disc->K(),
                                                               disc->cutoff(), disc->L());
        Eigen::MatrixXd start = cur;
        if (s_prev > 0.0) start += (s - s_prev) / (s_prev - s_pp) * (cur - prev);
        sol = detail::newton_mapped(params, sub, start, opt);
        prev = std::move(cur);
        cur = sol.U;
        s_pp = s_prev;
        s_prev = s;
      }
      return sol;
    } catch (const ConvergenceFailure&) {
    }
  }
  throw ConvergenceFailure("perturbed Dirichlet problem did not converge");
}

/// F(lambda, v) sampled at the collocation angles plus its mode coefficients.
struct DefectField {
  std::vector<double> theta;
  std::vector<double> values;          // F at collocation angles
  std::vector<double> normal_derivative;  // d_nu u at collocation angles
  std::vector<double> coeffs;          // cosine coefficients of F (m = 0..K)
  double boundary_mean = 0.0;          // perimeter-weighted mean of d_nu u
  double weighted_mean = 0.0;          // perimeter-weighted mean of F
  double l2_norm = 0.0;                // over the full circle

  double evaluate(int i1, double th) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) acc += coeffs[m] * std::cos(static_cast<double>(m * i1) * th);
    return acc;
  }
};

/// Normal derivative (normal pointing into the hole) minus its perimeter mean.
inline DefectField defect(const ProblemParams& params, const PerturbedSolution& sol) {
  const MappedDisc& disc = *sol.disc;
  const int nb = disc.K() + 1;
  const double om = disc.omega();
  const Eigen::MatrixXd& C = disc.cos_table();
  // conormal flux q(theta) = a_tt u_t at t = 1 from the boundary reaction moments
  Eigen::VectorXd qm(nb);
  for (int m = 0; m < nb; ++m) qm(m) = -sol.reaction(m) / MappedDisc::mode_norm(m);
  DefectField out;
  out.theta = disc.theta();
  const int L = disc.L();
  double flux_integral = 0.0, perimeter = 0.0;
  out.normal_derivative.resize(L);
  std::vector<double> ds(L);
  for (int l = 0; l < L; ++l) {
    const double qv = C.row(l).dot(qm);
    const double v = disc.v(l), dv = disc.dv(l);
    const double stretch = std::sqrt((1.0 + v) * (1.0 + v) + dv * dv);
    out.normal_derivative[l] = -qv / (params.lambda * stretch);
    ds[l] = stretch;
    flux_integral += om * out.normal_derivative[l] * stretch;
    perimeter += om * stretch;
  }
  out.boundary_mean = flux_integral / perimeter;
  out.values.resize(L);
  double wm = 0.0, l2 = 0.0;
  out.coeffs.assign(nb, 0.0);
  for (int l = 0; l < L; ++l) {
    out.values[l] = out.normal_derivative[l] - out.boundary_mean;
    wm += om * out.values[l] * ds[l];
    l2 += om * out.values[l] * out.values[l];
    for (int m = 0; m < nb; ++m) out.coeffs[m] += om * out.values[l] * C(l, m) / MappedDisc::mode_norm(m);
  }
  out.weighted_mean = wm / perimeter;
  out.l2_norm = std::sqrt(2.0 * std::numbers::pi * l2);
  return out;
}

/// Linearization ladder at one lambda.
struct DefectReport {
  double lambda = 0.0;
  int i1 = 0;
  int K = 0;
  double sigma = 0.0;           // sigma_{i1}(lambda) from the mode solver
  double boundary_slope = 0.0;  // u'(1)
  std::vector<double> epsilons;
  std::vector<double> defect_norms;
  std::vector<double> linearization_errors;
  std::vector<double> leading_coeffs;     // cos(i1 theta) coefficient of F
  std::vector<double> boundary_means;     // perimeter mean of d_nu u
  std::vector<double> residuals;
  std::vector<double> error_orders;       // log2-type ratios between consecutive epsilons
  std::vector<double> norm_ratios;        // (|F|/eps)_k / (|F|/eps)_{k+1}
  double observed_order = 0.0;            // minimum of error_orders
  std::vector<DefectField> fields;
};

struct DefectOptions {
  int K = 8;
  Cutoff cutoff{};
  PerturbedOptions newton{};
  bool keep_fields = false;
};

/// F(lambda, eps zeta) for zeta = cos(i1 theta) against eps (-u'(1)) sigma zeta.
inline DefectReport linearization_check(int p_N, double p, double lambda, const GridPolicy& policy,
                                        const GroupSpec& group, const std::vector<double>& epsilons,
                                        const DefectOptions& opt = {}) {
  require(p_N == 2 && group.N() == 2, "defect linearization runs in dimension 2");
  require(epsilons.size() >= 2, "linearization check needs at least two epsilon values");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(std::isfinite(epsilons[i]) && epsilons[i] > 0.0, "epsilon values must be positive");
    if (i > 0) require(epsilons[i] < epsilons[i - 1], "epsilon ladder must decrease");
  }
  const GroundStateSample s = ground_state_at(2, p, lambda, policy);
  const int i1 = group.i1();
  DefectReport rep;
  rep.lambda = lambda;
  rep.i1 = i1;
  rep.K = opt.K;
  rep.sigma = steklov_mode(s.params, s.grid, s.u, i1, group).sigma;
  rep.boundary_slope = s.u.boundary_slope;
  rep.epsilons = epsilons;
  const double lin = -rep.boundary_slope * rep.sigma;
  for (double eps : epsilons) {
    auto disc = std::make_shared<const MappedDisc>(s.grid, i1, single_mode_perturbation(opt.K, eps), opt.K,
                                                   opt.cutoff);
    const PerturbedSolution sol = solve_perturbed_dirichlet(s.params, disc, s.u, opt.newton);
    DefectField F = defect(s.params, sol);
    double err = 0.0;
    for (int l = 0; l < disc->L(); ++l) {
      const double e = F.values[l] - eps * lin * disc->cos_table()(l, 1);
      err += disc->omega() * e * e;
    }
    rep.defect_norms.push_back(F.l2_norm);
    rep.linearization_errors.push_back(std::sqrt(2.0 * std::numbers::pi * err));
    rep.leading_coeffs.push_back(F.coeffs[1]);
    rep.boundary_means.push_back(F.boundary_mean);
    rep.residuals.push_back(sol.residual_norm);
    if (opt.keep_fields) rep.fields.push_back(std::move(F));
  }
  rep.observed_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < epsilons.size(); ++i) {
    const double ratio = epsilons[i] / epsilons[i + 1];
    const double order = std::log(rep.linearization_errors[i] / rep.linearization_errors[i + 1]) / std::log(ratio);
    rep.error_orders.push_back(order);
    rep.observed_order = std::min(rep.observed_order, order);
    rep.norm_ratios.push_back((rep.defect_norms[i] / epsilons[i]) / (rep.defect_norms[i + 1] / epsilons[i + 1]));
  }
  return rep;
}

}  // namespace ebl
