#pragma once

#include "specgal/config.hpp"
#include "specgal/continuation.hpp"
#include "specgal/convergence.hpp"
#include "specgal/eigensolve.hpp"
#include "specgal/gram.hpp"
#include "specgal/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace specgal {

struct CheckResult {
  std::string name;
  bool pass = false;
  double slack = 0.0;  // bound minus measured value; >= 0 iff pass
  std::string detail;
};

namespace detail {

/// Random coefficient vector with equal expected X-energy per mode, scaled
/// to the requested X-norm.  Drawing raw Gaussians would concentrate all the
/// X-energy in the top modes; this is the natural uniform draw on the X-ball.
inline Eigen::VectorXd random_x_vector(std::mt19937_64& rng, const Eigen::VectorXd& xdiag,
                                       double norm_target) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd c(xdiag.size());
  for (int i = 0; i < c.size(); ++i) c[i] = N(rng) / std::sqrt(xdiag[i]);
  const double nx = std::sqrt(c.dot(xdiag.cwiseProduct(c)));
  return c * (norm_target / nx);
}

inline CheckResult bound_check(std::string name, double value, double bound, std::string detail = "") {
  CheckResult r;
  r.name = std::move(name);
  r.slack = bound - value;
  r.pass = r.slack >= 0.0;
  r.detail = detail.empty() ? ("value=" + std::to_string(value) + " bound=" + std::to_string(bound))
                            : std::move(detail);
  return r;
}

}  // namespace detail

/// The invariant battery behind `verify`: quadrature and Gram closed forms,
/// the eigenvalue inequality chain, Jacobian consistency, homogeneity and
/// equivariance, and the continuation bookkeeping, all at the configured
/// sizes.  Pure report; nothing throws for a failed check.
inline std::vector<CheckResult> run_verification(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(cfg.seed);
  const DomainSpec dom = cfg.domain_spec();
  const GridValues g = cfg.weight_grid(dom);
  const GramX gx = gram_x(dom);
  const GramH1 gh = gram_h1(dom);
  const double L0 = dom.lengths[0];

  // --- quadrature closed forms
  {
    BasisTables T(dom);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(dom.grid_size());
    out.push_back(detail::bound_check("quadrature_box_volume",
                                      std::abs(detail::integrate_grid(T, ones) - dom.volume()),
                                      1e-12 * dom.volume()));
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(dom.basis_size());
    e1[0] = 1.0;
    Eigen::VectorXd s = detail::eval_tensor(T, e1, {0, 0, 0});
    const double hv = detail::half_volume(dom);
    out.push_back(detail::bound_check(
        "quadrature_sin_squared",
        std::abs(detail::integrate_grid(T, s.array().square().matrix()) - hv), 1e-12 * hv));
  }
  {
    // quartic products of the top mode need the escalated rule
    DomainSpec esc = DomainSpec::box(dom.dim, dom.modes, dom.lengths, 4 * dom.modes + 16);
    BasisTables T(esc);
    Eigen::VectorXd etop = Eigen::VectorXd::Zero(esc.basis_size());
    etop[esc.basis_size() - 1] = 1.0;
    Eigen::VectorXd s = detail::eval_tensor(T, etop, {0, 0, 0});
    double expect = 1.0;
    for (int i = 0; i < esc.dim; ++i) expect *= 3.0 * esc.lengths[static_cast<std::size_t>(i)] / 8.0;
    out.push_back(detail::bound_check(
        "quadrature_sin_quartic_escalated",
        std::abs(detail::integrate_grid(T, s.array().pow(4).matrix()) - expect), 1e-12 * expect));
  }

  // --- spectral differentiation vs direct summation at a probe point
  {
    BasisTables T(dom);
    Eigen::VectorXd c = detail::random_x_vector(rng, gx.diag, 0.3);
    const std::array<int, 3> order = dom.dim == 1 ? std::array<int, 3>{2, 0, 0}
                                                  : std::array<int, 3>{1, 1, 0};
    Eigen::VectorXd fast = detail::eval_tensor(T, c, order);
    const int probe = dom.grid_size() / 3;
    double direct = 0.0;
    for (int flat = 0; flat < dom.basis_size(); ++flat) {
      const BasisIndex idx = unflatten(dom, flat);
      double term = c[flat];
      int rem = probe;
      std::array<int, 3> q{0, 0, 0};
      for (int i = dom.dim - 1; i >= 0; --i) {
        q[static_cast<std::size_t>(i)] = rem % dom.quad_order;
        rem /= dom.quad_order;
      }
      for (int i = 0; i < dom.dim; ++i)
        term *= T.axis[static_cast<std::size_t>(i)].deriv[static_cast<std::size_t>(
            order[static_cast<std::size_t>(i)])](idx.k[static_cast<std::size_t>(i)] - 1,
                                                 q[static_cast<std::size_t>(i)]);
      direct += term;
    }
    out.push_back(detail::bound_check("spectral_diff_exact", std::abs(fast[probe] - direct),
                                      1e-10 * std::max(1.0, std::abs(direct))));
  }

  // --- Hessian-determinant directional derivative against central differences
  {
    Eigen::VectorXd cu = detail::random_x_vector(rng, gx.diag, 0.2);
    Eigen::VectorXd cv = detail::random_x_vector(rng, gx.diag, 0.2);
    const double h = 1e-4;
    Field fu{dom, cu}, fv{dom, cv};
    GridValues dd = hessian_determinant_directional(fu, fv);
    GridValues p{dom, cu + h * cv}, m{dom, cu - h * cv};
    Eigen::VectorXd fd = (hessian_determinant(Field{dom, cu + h * cv}).values -
                          hessian_determinant(Field{dom, cu - h * cv}).values) /
                         (2.0 * h);
    const double err = (fd - dd.values).cwiseAbs().maxCoeff();
    out.push_back(detail::bound_check("hessian_directional_fd", err,
                                      dom.dim == 3 ? 1e-6 : 1e-9));
  }

  // --- Gram anchors and the Loewner chain
  {
    DomainSpec unit = DomainSpec::box(1, 1);
    out.push_back(detail::bound_check("gram_x_unit_anchor",
                                      std::abs(gram_x(unit).diag[0] - 4.0 * std::numbers::pi),
                                      1e-12 * 4.0 * std::numbers::pi));
  }
  {
    GridValues one{dom, Eigen::VectorXd::Ones(dom.grid_size())};
    const MassMatrix m1 = mass(dom, one);
    const double lam0 = dirichlet_lambda0(dom);
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd c = detail::random_x_vector(rng, gx.diag, 1.0);
      const double xq = c.dot(gx.diag.cwiseProduct(c));
      const double hq = c.dot(gh.diag.cwiseProduct(c));
      const double mq = c.dot(m1.entries * c);
      worst = std::min(worst, xq - hq);
      worst = std::min(worst, hq - lam0 * mq + 1e-9 * xq);
    }
    out.push_back(detail::bound_check("loewner_ordering", -worst, 0.0,
                                      "min slack over 1000 draws = " + std::to_string(worst)));
  }
  {
    BasisTables T(dom);
    Eigen::MatrixXd raw = detail::assemble_bilinear(T, g.values, {0, 0, 0}, {0, 0, 0});
    out.push_back(detail::bound_check("mass_symmetry",
                                      (raw - raw.transpose()).cwiseAbs().maxCoeff(), 1e-12));
    if (g.values.minCoeff() > 0.0) {
      GridValues one{dom, Eigen::VectorXd::Ones(dom.grid_size())};
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(mass(dom, one).entries);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(0.5 * (raw + raw.transpose()));
      out.push_back(detail::bound_check(
          "mass_positivity",
          g.values.minCoeff() * e1.eigenvalues().minCoeff() - 1e-9 - eg.eigenvalues().minCoeff(),
          0.0));
    }
  }

  // --- eigenvalue chain on the configured weight, inside the window
  {
    const StabilityWindow w = stability_window(dom, g, cfg.delta);
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(w.s_star * i / 7.0);
    const PerturbedCurve curve = perturbed_curve(dom, g, grid, "verify");
    std::vector<Decomposition> decs;
    for (const auto& [eps, pair] : curve.pairs)
      decs.push_back(decompose(pair, eps, curve.pairs.front().second, dom, g, cfg.exceptional_tol));
    const BoundsReport rep = verify_bounds(curve, decs, w, dom, g);
    for (const BoundsCheck& ch : rep.checks)
      out.push_back(CheckResult{"eigen_" + ch.name, ch.pass, ch.slack, ""});

    double worst_res = 0.0;
    for (const auto& [eps, pair] : curve.pairs) worst_res = std::max(worst_res, pair.residual);
    out.push_back(detail::bound_check("eigen_pencil_residual", worst_res, 1e-10));

    // grad-orthogonality of xi transfers to the weighted mass form because
    // u0 solves the eps = 0 pencil
    const MassMatrix m = mass(dom, g);
    const Eigen::VectorXd& c0 = curve.pairs.front().second.u.coeffs;
    double worst_tr = 0.0;
    for (std::size_t i = 1; i < curve.pairs.size(); ++i) {
      const Eigen::VectorXd& ce = curve.pairs[i].second.u.coeffs;
      const Decomposition& d = decs[i];
      const Eigen::VectorXd xi = ce - (d.alpha + d.beta) * c0;
      worst_tr = std::max(worst_tr, std::abs(xi.dot(m.entries * c0)));
    }
    out.push_back(detail::bound_check("orthogonality_transfer", worst_tr, 1e-10));
  }

  // --- exceptional affine law on the constant weight
  {
    GridValues one{dom, Eigen::VectorXd::Ones(dom.grid_size())};
    const EigenPair p0 = principal_eigenpair(dom, one);
    const MassMatrix m1 = mass(dom, one);
    const double kappa0 = 1.0 / p0.u.coeffs.dot(m1.entries * p0.u.coeffs);
    double worst = 0.0;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      const EigenPair p = perturbed_eigenpair(dom, one, eps);
      worst = std::max(worst, std::abs(p.lambda - p0.lambda - eps * kappa0) / p0.lambda);
      worst = std::max(worst, (p.u.coeffs - p0.u.coeffs).cwiseAbs().maxCoeff());
    }
    out.push_back(detail::bound_check("exceptional_affine_curve", worst, 1e-10));
  }

  // --- nonlinear system invariants at the configured kind
  {
    ResidualSystem sys(dom, cfg.nonlinearity_kind(), cfg.cont_eps);
    double worst_fd = 0.0;
    std::uniform_int_distribution<int> pick(0, dom.basis_size() - 1);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd c = detail::random_x_vector(rng, gx.diag, 0.1);
      const double lambda = 0.9;
      const Eigen::MatrixXd J = sys.jacobian(lambda, c);
      for (int rep = 0; rep < 3; ++rep) {
        const int k = pick(rng);
        const double h = 1e-5;
        Eigen::VectorXd cp = c, cm = c;
        cp[k] += h;
        cm[k] -= h;
        const Eigen::VectorXd fd = (sys.residual(lambda, cp) - sys.residual(lambda, cm)) / (2.0 * h);
        const double scale = std::max(J.col(k).cwiseAbs().maxCoeff(), 1e-12);
        worst_fd = std::max(worst_fd, (fd - J.col(k)).cwiseAbs().maxCoeff() / scale);
      }
    }
    out.push_back(detail::bound_check("jacobian_fd_consistency", worst_fd, 1e-6));

    Eigen::VectorXd c = detail::random_x_vector(rng, gx.diag, 0.5);
    if (cfg.kind == NonlinearityTag::multiplicative) {
      const Eigen::VectorXd n1 = sys.nonlinear_term(c);
      const Eigen::VectorXd n2 = sys.nonlinear_term((2.0 * c).eval());
      const double degree = std::pow(2.0, 2 * dom.dim + 1);
      out.push_back(detail::bound_check(
          "homogeneity_degree",
          (n2 - degree * n1).cwiseAbs().maxCoeff() / std::max(1e-300, n2.cwiseAbs().maxCoeff()),
          1e-12, "degree 2*dim+1"));
      const Eigen::VectorXd rp = sys.residual(0.8, c);
      const Eigen::VectorXd rm = sys.residual(0.8, (-c).eval());
      out.push_back(detail::bound_check("oddness_equivariance", (rp + rm).cwiseAbs().maxCoeff(),
                                        1e-12 * std::max(1.0, rp.cwiseAbs().maxCoeff())));
      const double order = sys.observed_decay_order(c);
      out.push_back(detail::bound_check("smallness_decay_order",
                                        std::abs(order - 2.0 * dom.dim), 0.2,
                                        "observed " + std::to_string(order)));
    }
    const Eigen::VectorXd r0 = sys.residual(1.3, Eigen::VectorXd::Zero(dom.basis_size()));
    out.push_back(detail::bound_check("trivial_line_preserved", r0.cwiseAbs().maxCoeff(), 0.0));
  }

  // --- continuation bookkeeping on a short trace
  {
    ResidualSystem sys(dom, cfg.nonlinearity_kind(), cfg.cont_eps);
    ContinuationParams prm = cfg.continuation_params();
    prm.max_steps = std::min(prm.max_steps, 60);
    const Branch plus = trace_branch(sys, +1, prm);
    const Branch minus = trace_branch(sys, -1, prm);
    double worst_res = 0.0;
    for (const BranchPoint& p : plus.points)
      worst_res = std::max(worst_res, sys.residual(p.lambda, p.c).norm());
    out.push_back(detail::bound_check("branch_residual_recheck", worst_res, prm.tol));

    const BifurcationPoint bif = bifurcation_tangent(sys);
    double launch = plus.points.size() > 1
                        ? plus.points[1].c.dot(gx.diag.cwiseProduct(bif.direction.coeffs))
                        : -1.0;
    out.push_back(detail::bound_check("branch_launch_consistency", -launch, 0.0,
                                      "X-inner product with launch direction = " + std::to_string(launch)));

    if (cfg.kind == NonlinearityTag::multiplicative) {
      double odd = 0.0;
      const std::size_t n = std::min(plus.points.size(), minus.points.size());
      for (std::size_t i = 0; i < n; ++i)
        odd = std::max(odd, (plus.points[i].c + minus.points[i].c).cwiseAbs().maxCoeff());
      out.push_back(detail::bound_check("branch_oddness", odd, 1e-8));
    }

    // step-halving ladder: the directed vertex distance into the refinement
    // contracts like O(ds^2)
    ContinuationParams half = prm;
    half.ds = prm.ds / 2.0;
    half.max_steps = prm.max_steps * 2;
    ContinuationParams quarter = prm;
    quarter.ds = prm.ds / 4.0;
    quarter.max_steps = prm.max_steps * 4;
    const Branch bh = trace_branch(sys, +1, half);
    const Branch bq = trace_branch(sys, +1, quarter);
    const double R = 1e9;  // compare full traces
    const double d1 = branch_distance_directed(plus, bh, R, bif.lambda0, gx.diag);
    const double d2 = branch_distance_directed(bh, bq, R, bif.lambda0, gx.diag);
    out.push_back(detail::bound_check("step_halving_ladder", d2, d1 / 2.0,
                                      "d(ds)=" + std::to_string(d1) + " d(ds/2)=" + std::to_string(d2)));

    // distances matrix properties on the three traces
    const Branch* bs[3] = {&plus, &bh, &bq};
    double dm[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        dm[i][j] = branch_distance(*bs[i], *bs[j], R, bif.lambda0, gx.diag);
    double sym = 0.0, diag = 0.0, tri = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      diag = std::max(diag, dm[i][i]);
      for (int j = 0; j < 3; ++j) {
        sym = std::max(sym, std::abs(dm[i][j] - dm[j][i]));
        for (int k = 0; k < 3; ++k) tri = std::max(tri, dm[i][j] - dm[i][k] - dm[k][j]);
      }
    }
    out.push_back(detail::bound_check("distance_symmetry", sym, 1e-12));
    out.push_back(detail::bound_check("distance_zero_diagonal", diag, 1e-12));
    out.push_back(detail::bound_check("distance_triangle", tri, 1e-9));

    // induced weight never dips below 1
    double wmin = 1.0;
    for (const BranchPoint& p : plus.points)
      wmin = std::min(wmin, induced_weight(dom, p).values.minCoeff());
    out.push_back(detail::bound_check("induced_weight_floor", 1.0 - wmin, 0.0));
  }

  (void)L0;
  return out;
}

}  // namespace specgal
