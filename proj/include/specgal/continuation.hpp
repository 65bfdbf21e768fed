#pragma once

#include "specgal/eigensolve.hpp"
#include "specgal/nonlinear.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

namespace specgal {

/// Product metric on R x X with lambda scaled by the unperturbed principal
/// eigenvalue; the ball B_R(lambda0, 0) and all arclength bookkeeping use it.
struct ProductMetric {
  double lambda_scale = 1.0;

  double norm(double dlambda, const Eigen::VectorXd& dc, const Eigen::VectorXd& xdiag) const {
    const double a = dlambda / lambda_scale;
    return std::sqrt(a * a + dc.dot(xdiag.cwiseProduct(dc)));
  }
};

struct BranchPoint {
  double lambda = 0.0;
  Eigen::VectorXd c;
  double norm_x = 0.0;
  double min_on_grid = 0.0;
  double max_on_grid = 0.0;
  int step = 0;
};

enum class Termination { exited_ball, max_steps, returned_to_trivial, corrector_failure, smallness_refused };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::exited_ball: return "exited_ball";
    case Termination::max_steps: return "max_steps";
    case Termination::returned_to_trivial: return "returned_to_trivial";
    case Termination::corrector_failure: return "corrector_failure";
    case Termination::smallness_refused: return "smallness_refused";
  }
  return "unknown";
}

struct Branch {
  double eps = 0.0;
  int sign = +1;
  std::vector<BranchPoint> points;
  Termination termination = Termination::max_steps;
  double lambda_star = 0.0;  // set when termination == returned_to_trivial
};

struct ContinuationParams {
  double ds = 1e-2;
  double radius = 1.0;
  int max_steps = 2000;
  double tol = 1e-10;
  int newton_max_iter = 25;
  int max_halvings = 6;
  double return_tol_factor = 10.0;  // trivial-line tolerance is factor * ds
};

/// Launch data at the bifurcation point of the trivial line: the perturbed
/// principal eigenvalue, the X-normalized eigenfunction as the tangent
/// direction, the pencil gap, and the unperturbed lambda0 for the metric.
struct BifurcationPoint {
  double lambda = 0.0;
  Field direction;
  double gap = 0.0;
  double lambda0 = 0.0;
};

inline BifurcationPoint bifurcation_tangent(const ResidualSystem& sys) {
  const DomainSpec& d = sys.domain();
  GridValues one{d, Eigen::VectorXd::Ones(d.grid_size())};
  const SimplicityReport simp = simplicity_check(d, one, sys.eps());
  if (!simp.simple)
    throw std::runtime_error("bifurcation_tangent: perturbed principal eigenvalue is not simple");
  const EigenPair p = perturbed_eigenpair(d, one, sys.eps());
  const EigenPair p0 = sys.eps() == 0.0 ? p : principal_eigenpair(d, one);
  return BifurcationPoint{p.lambda, p.u, simp.gap, p0.lambda};
}

namespace detail {

inline BranchPoint make_point(const ResidualSystem& sys, double lambda, Eigen::VectorXd c, int step) {
  BranchPoint p;
  p.lambda = lambda;
  p.norm_x = sys.norm_x(c);
  const Eigen::VectorXd vals = sys.values_on_grid(c);
  p.min_on_grid = vals.minCoeff();
  p.max_on_grid = vals.maxCoeff();
  p.c = std::move(c);
  p.step = step;
  return p;
}

/// One bordered corrector solve: residual plus the arclength row
/// <t, y - y_prev> = ds in the product metric.
inline bool bordered_correct(const ResidualSystem& sys, const ProductMetric& metric, double ds,
                             double t_lambda, const Eigen::VectorXd& t_c, double lambda_prev,
                             const Eigen::VectorXd& c_prev, double& lambda, Eigen::VectorXd& c,
                             const ContinuationParams& prm) {
  const int m = static_cast<int>(c.size());
  const Eigen::VectorXd& xd = sys.x_diag();
  const double ls2 = metric.lambda_scale * metric.lambda_scale;

  const auto arc = [&](double l, const Eigen::VectorXd& cc) {
    return t_lambda * (l - lambda_prev) / ls2 + t_c.dot(xd.cwiseProduct(cc - c_prev)) - ds;
  };
  const auto total_norm = [&](const Eigen::VectorXd& r, double a) { return std::hypot(r.norm(), a); };

  // the arclength row is rescaled to unit max entry; the strong-form Gram
  // weights would otherwise dwarf every residual row in the pivoting
  Eigen::VectorXd arc_row = t_c.cwiseProduct(xd);
  double arc_l = t_lambda / ls2;
  const double rowscale = std::max(arc_row.cwiseAbs().maxCoeff(), std::abs(arc_l));

  Eigen::VectorXd r = sys.residual(lambda, c);
  double a = arc(lambda, c);
  double rn = total_norm(r, a);
  for (int it = 0; it < prm.newton_max_iter; ++it) {
    if (rn <= prm.tol) return true;
    Eigen::MatrixXd big(m + 1, m + 1);
    big.topLeftCorner(m, m) = sys.jacobian(lambda, c);
    big.topRightCorner(m, 1) = sys.dresidual_dlambda(lambda, c);
    big.bottomLeftCorner(1, m) = arc_row.transpose() / rowscale;
    big(m, m) = arc_l / rowscale;
    Eigen::VectorXd rhs(m + 1);
    rhs.head(m) = -r;
    rhs[m] = -a / rowscale;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(big);
    const Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite()) return false;
    double t = 1.0;
    for (int h = 0; h <= prm.max_halvings; ++h) {
      Eigen::VectorXd cc = c + t * step.head(m);
      const double ll = lambda + t * step[m];
      Eigen::VectorXd rr = sys.residual(ll, cc);
      const double aa = arc(ll, cc);
      if (total_norm(rr, aa) < rn || h == prm.max_halvings) {
        c = std::move(cc);
        lambda = ll;
        r = std::move(rr);
        a = aa;
        rn = total_norm(r, a);
        break;
      }
      t *= 0.5;
    }
  }
  return rn <= prm.tol;
}

}  // namespace detail

/// Pseudo-arclength trace of one sign branch from the bifurcation point.
/// First predictor is the eigenfunction direction with amplitude ds; from
/// step 2 on a secant predictor is used.  Every accepted point is re-checked
/// against the corrector tolerance after the solve.
inline Branch trace_branch(const ResidualSystem& sys, int sign, const ContinuationParams& prm) {
  if (!(prm.ds > 0.0) || !(prm.radius > 0.0))
    throw std::invalid_argument("trace_branch: ds and radius must be positive");
  if (sign != +1 && sign != -1) throw std::invalid_argument("trace_branch: sign must be +1 or -1");

  const BifurcationPoint bif = bifurcation_tangent(sys);
  Branch br;
  br.eps = sys.eps();
  br.sign = sign;

  if (sys.kind().tag == NonlinearityTag::plugin) {
    const double order = sys.observed_decay_order(bif.direction.coeffs);
    if (!(order > 1.0)) {
      std::cerr << "trace_branch: plug-in nonlinearity decays with observed order " << order
                << " <= 1; refusing continuation\n";
      br.termination = Termination::smallness_refused;
      br.points.push_back(detail::make_point(sys, bif.lambda, Eigen::VectorXd::Zero(sys.domain().basis_size()), 0));
      return br;
    }
  }

  const ProductMetric metric{bif.lambda0};
  const Eigen::VectorXd& xd = sys.x_diag();
  const int m = sys.domain().basis_size();

  br.points.push_back(detail::make_point(sys, bif.lambda, Eigen::VectorXd::Zero(m), 0));

  // launch tangent: pure coefficient direction, unit in the product metric
  double t_lambda = 0.0;
  Eigen::VectorXd t_c = sign * bif.direction.coeffs;

  double lambda_prev = bif.lambda;
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(m);

  for (int step = 1; step <= prm.max_steps; ++step) {
    double lambda = lambda_prev + prm.ds * t_lambda;
    Eigen::VectorXd c = c_prev + prm.ds * t_c;
    if (!detail::bordered_correct(sys, metric, prm.ds, t_lambda, t_c, lambda_prev, c_prev, lambda,
                                  c, prm)) {
      br.termination = Termination::corrector_failure;
      return br;
    }
    // post-hoc residual recheck, independent of the corrector's bookkeeping
    if (sys.residual(lambda, c).norm() > prm.tol) {
      br.termination = Termination::corrector_failure;
      return br;
    }
    br.points.push_back(detail::make_point(sys, lambda, c, step));
    const BranchPoint& p = br.points.back();

    if (metric.norm(lambda - bif.lambda0, c, xd) > prm.radius) {
      br.termination = Termination::exited_ball;
      return br;
    }
    if (step >= 2 && p.norm_x < prm.return_tol_factor * prm.ds &&
        std::abs(lambda - bif.lambda) > bif.gap / 2.0) {
      br.termination = Termination::returned_to_trivial;
      br.lambda_star = lambda;
      return br;
    }

    // secant tangent in the product metric
    const double dl = lambda - lambda_prev;
    Eigen::VectorXd dc = c - c_prev;
    const double n = metric.norm(dl, dc, xd);
    t_lambda = dl / n;
    t_c = dc / n;
    lambda_prev = lambda;
    c_prev = std::move(c);
  }
  br.termination = Termination::max_steps;
  return br;
}

/// First step index whose grid values touch zero from the branch sign, or
/// none.  The + branch is scanned with min <= 0, the - branch with max >= 0.
/// The trivial launch point (u = 0) is skipped.
inline std::optional<int> positivity_scan(const Branch& br) {
  for (const BranchPoint& p : br.points) {
    if (p.step == 0) continue;
    if (br.sign > 0 && p.min_on_grid <= 0.0) return p.step;
    if (br.sign < 0 && p.max_on_grid >= 0.0) return p.step;
  }
  return std::nullopt;
}

struct Alternative {
  enum class Kind { global_candidate, returns_to } kind = Kind::global_candidate;
  double lambda_star = 0.0;
};

/// Rabinowitz classification of a completed branch: a revisit of the trivial
/// line away from the launch eigenvalue realizes the second alternative;
/// everything else (ball exit, step budget) stays a global candidate.
inline Alternative classify_alternative(const ResidualSystem& sys, const Branch& br,
                                        const ContinuationParams& prm) {
  const BifurcationPoint bif = bifurcation_tangent(sys);
  if (br.termination == Termination::returned_to_trivial)
    return Alternative{Alternative::Kind::returns_to, br.lambda_star};
  for (const BranchPoint& p : br.points) {
    if (p.step < 2) continue;
    if (p.norm_x < prm.return_tol_factor * prm.ds && std::abs(p.lambda - bif.lambda) > bif.gap / 2.0)
      return Alternative{Alternative::Kind::returns_to, p.lambda};
  }
  return Alternative{Alternative::Kind::global_candidate, 0.0};
}

}  // namespace specgal
