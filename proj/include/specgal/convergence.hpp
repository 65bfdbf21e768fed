#pragma once

#include "specgal/continuation.hpp"
#include "specgal/eigensolve.hpp"
#include "specgal/nonlinear.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace specgal {

namespace detail {

inline std::vector<const BranchPoint*> truncate_to_ball(const Branch& br, double R, double lambda0,
                                                        const Eigen::VectorXd& xdiag) {
  const ProductMetric metric{lambda0};
  std::vector<const BranchPoint*> pts;
  for (const BranchPoint& p : br.points)
    if (metric.norm(p.lambda - lambda0, p.c, xdiag) <= R) pts.push_back(&p);
  return pts;
}

}  // namespace detail

/// Symmetric Hausdorff distance between the vertex sets of two branches,
/// both truncated to the ball B_R(lambda0, 0) in the product metric.
/// An empty truncation yields +infinity.
inline double branch_distance(const Branch& a, const Branch& b, double R, double lambda0,
                              const Eigen::VectorXd& xdiag) {
  const ProductMetric metric{lambda0};
  const auto pa = detail::truncate_to_ball(a, R, lambda0, xdiag);
  const auto pb = detail::truncate_to_ball(b, R, lambda0, xdiag);
  if (pa.empty() || pb.empty()) return std::numeric_limits<double>::infinity();
  const auto directed = [&](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const BranchPoint* p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const BranchPoint* q : to)
        best = std::min(best, metric.norm(p->lambda - q->lambda, p->c - q->c, xdiag));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

/// One-sided Hausdorff (every point of `from` near some point of `to`); the
/// step-halving ladder uses this form, which contracts like O(ds^2) when a
/// trace is compared with its own refinement.
inline double branch_distance_directed(const Branch& from, const Branch& to, double R,
                                       double lambda0, const Eigen::VectorXd& xdiag) {
  const ProductMetric metric{lambda0};
  const auto pa = detail::truncate_to_ball(from, R, lambda0, xdiag);
  const auto pb = detail::truncate_to_ball(to, R, lambda0, xdiag);
  if (pa.empty() || pb.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const BranchPoint* p : pa) {
    double best = std::numeric_limits<double>::infinity();
    for (const BranchPoint* q : pb)
      best = std::min(best, metric.norm(p->lambda - q->lambda, p->c - q->c, xdiag));
    worst = std::max(worst, best);
  }
  return worst;
}

/// Pairwise branch distances across an eps sequence plus the liminf witness
/// (the bifurcation points converging to (lambda0, 0)) and the limit branch.
struct SweepReport {
  std::vector<double> eps_list;              // as traced, descending
  Eigen::MatrixXd distances;                 // symmetric, zero diagonal
  std::vector<double> lambda_bif;            // lambda_{0,eps} per entry
  double lambda0 = 0.0;
  double kappa0 = 0.0;
  double liminf_defect = 0.0;  // max over n of |lambda_bif - lambda0 - eps*kappa0| / (eps*kappa0)
  bool liminf_pass = false;
  std::vector<Branch> branches;              // aligned with eps_list
  int limit_index = -1;                      // index of the eps = 0 (or smallest-eps) trace
  std::vector<std::string> errors;           // per-eps failures, empty when clean
};

/// Traces C_eps^sign for every eps in the (descending) list and fills the
/// distance matrix on the ball truncations.  The limit branch is the eps = 0
/// trace when the list contains 0 (the Galerkin system is smooth there), the
/// smallest-eps trace otherwise.  Per-eps trace failures are recorded, not
/// fatal.
inline SweepReport epsilon_sweep(const DomainSpec& domain, const NonlinearityKind& kind,
                                 std::vector<double> eps_list, int sign,
                                 const ContinuationParams& prm) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon_sweep: empty eps list");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());

  SweepReport rep;
  rep.eps_list = eps_list;
  GridValues one{domain, Eigen::VectorXd::Ones(domain.grid_size())};
  const EigenPair p0 = principal_eigenpair(domain, one);
  rep.lambda0 = p0.lambda;
  const MassMatrix m1 = mass(domain, one);
  rep.kappa0 = 1.0 / p0.u.coeffs.dot(m1.entries * p0.u.coeffs);
  const Eigen::VectorXd xdiag = gram_x(domain).diag;

  for (double eps : eps_list) {
    ResidualSystem sys(domain, kind, eps);
    try {
      Branch br = trace_branch(sys, sign, prm);
      if (br.termination == Termination::corrector_failure)
        rep.errors.push_back("eps=" + std::to_string(eps) + ": corrector failure after " +
                             std::to_string(br.points.size()) + " points");
      else
        rep.errors.emplace_back();
      rep.lambda_bif.push_back(br.points.front().lambda);
      rep.branches.push_back(std::move(br));
    } catch (const std::exception& e) {
      rep.errors.push_back("eps=" + std::to_string(eps) + ": " + e.what());
      rep.lambda_bif.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.branches.push_back(Branch{eps, sign, {}, Termination::corrector_failure, 0.0});
    }
  }

  const int n = static_cast<int>(eps_list.size());
  rep.distances = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d =
          branch_distance(rep.branches[static_cast<std::size_t>(i)],
                          rep.branches[static_cast<std::size_t>(j)], prm.radius, rep.lambda0, xdiag);
      rep.distances(i, j) = d;
      rep.distances(j, i) = d;
    }

  rep.limit_index = n - 1;  // list is descending; eps = 0 lands last when present

  // liminf witness: lambda_{0,eps} - lambda0 lies in (0, eps*kappa0] by the
  // Rayleigh bracket; exceptional weights give equality.
  rep.liminf_defect = 0.0;
  rep.liminf_pass = true;
  for (int i = 0; i < n; ++i) {
    const double eps = eps_list[static_cast<std::size_t>(i)];
    if (eps == 0.0 || !std::isfinite(rep.lambda_bif[static_cast<std::size_t>(i)])) continue;
    const double defect =
        std::abs(rep.lambda_bif[static_cast<std::size_t>(i)] - rep.lambda0 - eps * rep.kappa0) /
        (eps * rep.kappa0);
    rep.liminf_defect = std::max(rep.liminf_defect, defect);
    if (rep.lambda_bif[static_cast<std::size_t>(i)] < rep.lambda0 ||
        rep.lambda_bif[static_cast<std::size_t>(i)] > rep.lambda0 + eps * rep.kappa0 * (1.0 + 1e-9))
      rep.liminf_pass = false;
  }
  return rep;
}

/// Weight induced by a branch point: 1 + (det D^2 u)^2 on the Gauss grid.
inline GridValues induced_weight(const DomainSpec& domain, const BranchPoint& p) {
  const GridValues det = hessian_determinant(Field{domain, p.c});
  return GridValues{domain, (1.0 + det.values.array().square()).matrix()};
}

struct WeightLimitRow {
  double norm_x = 0.0;
  double eig_distance = 0.0;  // product-metric distance of the induced-weight principal pair to (lambda0, u0)
};

struct WeightLimitReport {
  std::vector<WeightLimitRow> rows;  // tail order, decreasing norm_x
  bool monotone_decreasing = false;
};

/// For a branch tail with norm_x -> 0, solves the principal eigenpair of the
/// induced weight per point and reports its distance to the unweighted pair.
inline WeightLimitReport weight_limit_diagnostic(const DomainSpec& domain,
                                                 const std::vector<BranchPoint>& tail) {
  WeightLimitReport rep;
  GridValues one{domain, Eigen::VectorXd::Ones(domain.grid_size())};
  const EigenPair ref = principal_eigenpair(domain, one);
  const Eigen::VectorXd xdiag = gram_x(domain).diag;
  for (const BranchPoint& p : tail) {
    const EigenPair e = principal_eigenpair(domain, induced_weight(domain, p));
    const Eigen::VectorXd du = e.u.coeffs - ref.u.coeffs;
    WeightLimitRow row;
    row.norm_x = p.norm_x;
    row.eig_distance = std::hypot(e.lambda - ref.lambda, std::sqrt(du.dot(xdiag.cwiseProduct(du))));
    rep.rows.push_back(row);
  }
  rep.monotone_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].eig_distance < rep.rows[i - 1].eig_distance)) rep.monotone_decreasing = false;
  return rep;
}

struct VanishingRow {
  double norm_x = 0.0;
  double det_ratio_sup = 0.0;     // sup |det D^2 u|^2 / |Delta u| over unmasked grid
  double linear_ratio_sup = 0.0;  // sup |lambda u / (-Delta u) - 1|
  int masked = 0;
  bool indeterminate = false;
};

struct VanishingReport {
  std::vector<VanishingRow> rows;
  bool det_ratio_decreasing = false;
  bool linear_ratio_decreasing = false;
};

/// Ratio diagnostics of the regularized-additive limit on a branch tail:
/// grid points with |Delta u| below mask_tol * ||u||_X are masked and
/// counted; a fully masked grid is reported indeterminate.
inline VanishingReport vanishing_ratio_diagnostic(const DomainSpec& domain,
                                                  const std::vector<BranchPoint>& tail,
                                                  double mask_tol = 1e-8) {
  VanishingReport rep;
  BasisTables T(domain);
  for (const BranchPoint& p : tail) {
    if (!(p.norm_x > 0.0)) {
      VanishingRow row;
      row.norm_x = p.norm_x;
      row.masked = domain.grid_size();
      row.indeterminate = true;
      rep.rows.push_back(row);
      continue;
    }
    const Field f{domain, p.c};
    Eigen::VectorXd lap = detail::eval_tensor(T, p.c, {2, 0, 0});
    if (domain.dim >= 2) lap += detail::eval_tensor(T, p.c, {0, 2, 0});
    if (domain.dim == 3) lap += detail::eval_tensor(T, p.c, {0, 0, 2});
    const Eigen::VectorXd det = hessian_determinant(T, f).values;
    const Eigen::VectorXd u = detail::eval_tensor(T, p.c, {0, 0, 0});

    VanishingRow row;
    row.norm_x = p.norm_x;
    const double cut = mask_tol * p.norm_x;
    double r1 = 0.0, r2 = 0.0;
    int live = 0;
    for (int g = 0; g < domain.grid_size(); ++g) {
      if (std::abs(lap[g]) < cut) {
        ++row.masked;
        continue;
      }
      ++live;
      r1 = std::max(r1, det[g] * det[g] / std::abs(lap[g]));
      r2 = std::max(r2, std::abs(p.lambda * u[g] / (-lap[g]) - 1.0));
    }
    row.indeterminate = live == 0;
    row.det_ratio_sup = r1;
    row.linear_ratio_sup = r2;
    rep.rows.push_back(row);
  }
  rep.det_ratio_decreasing = true;
  rep.linear_ratio_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].indeterminate || rep.rows[i - 1].indeterminate) continue;
    if (!(rep.rows[i].det_ratio_sup < rep.rows[i - 1].det_ratio_sup))
      rep.det_ratio_decreasing = false;
    if (!(rep.rows[i].linear_ratio_sup < rep.rows[i - 1].linear_ratio_sup))
      rep.linear_ratio_decreasing = false;
  }
  return rep;
}

}  // namespace specgal
