#pragma once

#include "specgal/basis.hpp"
#include "specgal/domain.hpp"
#include "specgal/gram.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace specgal {

/// One eigenpair of a weighted pencil.  u is normalized in the X form with
/// the sign fixed so that int u dx > 0 (first nonzero coefficient positive
/// when the mean vanishes).  residual is the scale-invariant pencil defect.
struct EigenPair {
  double lambda = 0.0;
  Field u;
  double residual = 0.0;
};

struct PerturbedCurve {
  std::string weight_id;
  std::vector<std::pair<double, EigenPair>> pairs;  // eps ascending, eps=0 first
};

/// (alpha, beta, eta, xi, kappa) bundle of one perturbed eigenpair split
/// against the unperturbed principal pair.
struct Decomposition {
  double alpha = 0.0;
  double beta = 0.0;
  double eta_norm_x = 0.0;
  double xi_norm_x = 0.0;
  double kappa_eps = 0.0;
  double kappa0 = 0.0;
  bool exceptional = false;
};

struct AuxSpectrum {
  std::vector<double> lambdas;  // ascending positive
  std::vector<Field> fields;
  std::optional<int> bracket_index;      // i with lambdas[i] < kappa0 < lambdas[i+1] (0-based)
  std::optional<int> exceptional_index;  // i with |kappa0 - lambdas[i]| < tol*lambdas[i]
  double kappa0 = 0.0;
};

struct StabilityWindow {
  double delta = 0.0;
  double s_star = 0.0;
  std::string n_threshold_note;
};

struct SimplicityReport {
  double gap = 0.0;
  bool simple = false;
  // <u,u>_X of the normalized eigenfunction; nonzero value certifies that
  // the shifted operator cannot map anything onto u, i.e. the range
  // obstruction holds (a tautological pass, reported with its value).
  double kernel_projection = 0.0;
};

namespace detail {

struct PencilSolution {
  std::vector<double> lambdas;            // ascending positive
  std::vector<Eigen::VectorXd> vectors;   // matching raw coefficient vectors
  std::vector<double> residuals;
};

inline std::string weight_summary(const GridValues& g) {
  std::ostringstream os;
  os << "weight[min=" << g.values.minCoeff() << ", max=" << g.values.maxCoeff() << "]";
  return os.str();
}

}  // namespace detail

/// Generalized pencil D c = lambda Mass c with D diagonal positive definite,
/// solved through the inverted form Mass c = mu D c, mu = 1/lambda: the
/// definite factor stays on the right, which also covers indefinite weights.
/// Returns the `count` smallest positive lambda in ascending order.
inline detail::PencilSolution positive_pencil_eigs(const Eigen::VectorXd& ddiag,
                                                   const Eigen::MatrixXd& mass, int count,
                                                   const std::string& what = "pencil") {
  if (ddiag.minCoeff() <= 0.0)
    throw std::invalid_argument(what + ": diagonal factor must be positive definite");
  const Eigen::VectorXd dm = ddiag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = dm.asDiagonal() * mass * dm.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error(what + ": symmetric eigensolve failed");
  detail::PencilSolution out;
  const int n = static_cast<int>(ddiag.size());
  for (int i = n - 1; i >= 0 && static_cast<int>(out.lambdas.size()) < count; --i) {
    const double mu = es.eigenvalues()[i];
    if (mu <= 0.0) break;
    const Eigen::VectorXd y = es.eigenvectors().col(i);
    const double res = (S * y - mu * y).norm() / mu;  // lambda * ||S y - mu y||
    out.lambdas.push_back(1.0 / mu);
    out.vectors.push_back(dm.cwiseProduct(y));
    out.residuals.push_back(res);
  }
  if (static_cast<int>(out.lambdas.size()) < count)
    throw std::runtime_error(what + ": no positive eigenvalue found (requested " +
                             std::to_string(count) + ", got " + std::to_string(out.lambdas.size()) + ")");
  return out;
}

namespace detail {

inline void x_normalize_sign_fix(Field& u, const Eigen::VectorXd& xdiag) {
  const double nx = std::sqrt(u.coeffs.dot(xdiag.cwiseProduct(u.coeffs)));
  if (!(nx > 0.0)) throw std::runtime_error("eigenpair normalization: zero vector");
  u.coeffs /= nx;
  const double mean = field_mean_integral(u);
  if (mean < -1e-12) {
    u.coeffs = -u.coeffs;
  } else if (std::abs(mean) <= 1e-12) {
    for (int i = 0; i < u.coeffs.size(); ++i) {
      if (std::abs(u.coeffs[i]) > 1e-12) {
        if (u.coeffs[i] < 0.0) u.coeffs = -u.coeffs;
        break;
      }
    }
  }
}

inline void check_weight_admissible(const BasisTables& T, const GridValues& g) {
  // discrete analog of |g^+| > 0: the positive part must carry quadrature mass
  Eigen::VectorXd gplus = g.values.cwiseMax(0.0);
  if (integrate_grid(T, gplus) <= 0.0)
    throw std::invalid_argument("principal eigensolve: " + weight_summary(g) +
                                " has no positive part on the grid");
}

}  // namespace detail

/// Smallest positive generalized eigenvalue of (eps GramX + GramH1, Mass(g))
/// with the X-normalized, sign-fixed eigenfunction.
inline EigenPair perturbed_eigenpair(const DomainSpec& domain, const GridValues& g, double eps) {
  if (eps < 0.0) throw std::invalid_argument("perturbed_eigenpair: eps must be >= 0");
  require_same_domain(domain, g.domain, "perturbed_eigenpair");
  BasisTables T(domain);
  detail::check_weight_admissible(T, g);
  const GramX gx = gram_x(domain);
  const GramH1 gh = gram_h1(domain);
  const MassMatrix m = mass(T, g);
  const Eigen::VectorXd d = eps * gx.diag + gh.diag;
  auto sol = positive_pencil_eigs(d, m.entries, 1, detail::weight_summary(g));
  EigenPair p;
  p.lambda = sol.lambdas[0];
  p.u = Field{domain, sol.vectors[0]};
  p.residual = sol.residuals[0];
  detail::x_normalize_sign_fix(p.u, gx.diag);
  return p;
}

inline EigenPair principal_eigenpair(const DomainSpec& domain, const GridValues& g) {
  return perturbed_eigenpair(domain, g, 0.0);
}

inline double second_eigenvalue(const DomainSpec& domain, const GridValues& g) {
  require_same_domain(domain, g.domain, "second_eigenvalue");
  BasisTables T(domain);
  detail::check_weight_admissible(T, g);
  const GramH1 gh = gram_h1(domain);
  const MassMatrix m = mass(T, g);
  auto sol = positive_pencil_eigs(gh.diag, m.entries, 2, detail::weight_summary(g));
  return sol.lambdas[1];
}

/// Eigenpair curve over an eps grid containing 0 (sorted ascending).
/// The discrete Rayleigh characterization makes lambda nondecreasing in eps;
/// a violation beyond solver precision indicates a broken weight and throws.
inline PerturbedCurve perturbed_curve(const DomainSpec& domain, const GridValues& g,
                                      std::vector<double> eps_grid,
                                      const std::string& weight_id = "") {
  if (eps_grid.empty()) throw std::invalid_argument("perturbed_curve: empty eps grid");
  std::sort(eps_grid.begin(), eps_grid.end());
  if (eps_grid.front() != 0.0)
    throw std::invalid_argument("perturbed_curve: eps grid must include 0");
  PerturbedCurve curve;
  curve.weight_id = weight_id;
  for (double eps : eps_grid) curve.pairs.emplace_back(eps, perturbed_eigenpair(domain, g, eps));
  for (std::size_t i = 1; i < curve.pairs.size(); ++i) {
    const double prev = curve.pairs[i - 1].second.lambda;
    const double cur = curve.pairs[i].second.lambda;
    if (cur < prev - 1e-10 * std::max(1.0, std::abs(prev)))
      throw std::runtime_error("perturbed_curve: lambda failed to be monotone in eps");
  }
  return curve;
}

/// Auxiliary pencil <u,v>_X = lambda <u,v>_{L2_g}: ascending eigenvalues with
/// eigenfunctions normalized in the weighted mass form.  Locates the bracket
/// of kappa0 = 1/||u0||^2_{L2_g} or flags the exceptional coincidence.
inline AuxSpectrum aux_spectrum(const DomainSpec& domain, const GridValues& g, int count,
                                double exceptional_tol = 1e-10) {
  require_same_domain(domain, g.domain, "aux_spectrum");
  if (count < 1 || count > domain.basis_size())
    throw std::invalid_argument("aux_spectrum: count must be in [1, basis_size]");
  BasisTables T(domain);
  detail::check_weight_admissible(T, g);
  const GramX gx = gram_x(domain);
  const MassMatrix m = mass(T, g);
  auto sol = positive_pencil_eigs(gx.diag, m.entries, count, detail::weight_summary(g));

  AuxSpectrum spec;
  for (int i = 0; i < count; ++i) {
    Field f{domain, sol.vectors[static_cast<std::size_t>(i)]};
    const double mn = f.coeffs.dot(m.entries * f.coeffs);
    if (mn > 0.0) f.coeffs /= std::sqrt(mn);
    spec.lambdas.push_back(sol.lambdas[static_cast<std::size_t>(i)]);
    spec.fields.push_back(std::move(f));
  }

  const EigenPair p0 = principal_eigenpair(domain, g);
  const double m0 = p0.u.coeffs.dot(m.entries * p0.u.coeffs);
  spec.kappa0 = 1.0 / m0;
  for (int i = 0; i < count; ++i) {
    if (std::abs(spec.kappa0 - spec.lambdas[static_cast<std::size_t>(i)]) <
        exceptional_tol * spec.lambdas[static_cast<std::size_t>(i)]) {
      spec.exceptional_index = i;
      break;
    }
  }
  if (!spec.exceptional_index) {
    for (int i = 0; i + 1 < count; ++i) {
      if (spec.lambdas[static_cast<std::size_t>(i)] < spec.kappa0 &&
          spec.kappa0 < spec.lambdas[static_cast<std::size_t>(i + 1)]) {
        spec.bracket_index = i;
        break;
      }
    }
  }
  return spec;
}

namespace detail {

/// Exceptional coincidence test: u0 is an eigenfunction of the auxiliary
/// pencil iff GramX c0 is parallel to Mass c0, i.e. the defect
/// X c0 - kappa0 Mass c0 vanishes.
inline bool exceptional_case(const Eigen::VectorXd& xdiag, const Eigen::MatrixXd& mass,
                             const Eigen::VectorXd& c0, double kappa0, double tol) {
  const Eigen::VectorXd xc = xdiag.cwiseProduct(c0);
  const Eigen::VectorXd defect = xc - kappa0 * (mass * c0);
  return defect.norm() <= tol * xc.norm();
}

}  // namespace detail

/// Split a perturbed eigenpair against the eps=0 principal pair:
/// u_eps = alpha u0 + eta with eta X-orthogonal to u0, then
/// eta = beta u0 + xi with xi grad-orthogonal to u0, and
/// kappa_eps = (lambda_eps - lambda_0)/eps.  The identity
/// kappa_eps = kappa0 alpha/(alpha+beta) is exact on the Galerkin space and
/// is cross-checked here; a violation means the two inputs do not solve the
/// same pencil family.
inline Decomposition decompose(const EigenPair& pair, double eps, const EigenPair& principal,
                               const DomainSpec& domain, const GridValues& g,
                               double exceptional_tol = 1e-10, double kappa_tol = 1e-8) {
  require_same_domain(domain, pair.u.domain, "decompose");
  require_same_domain(domain, principal.u.domain, "decompose");
  BasisTables T(domain);
  const GramX gx = gram_x(domain);
  const GramH1 gh = gram_h1(domain);
  const MassMatrix m = mass(T, g);

  const Eigen::VectorXd& c0 = principal.u.coeffs;
  const Eigen::VectorXd& ce = pair.u.coeffs;
  const double m0 = c0.dot(m.entries * c0);
  if (!(m0 > 0.0)) throw std::invalid_argument("decompose: principal pair has nonpositive weighted mass");

  Decomposition dec;
  dec.kappa0 = 1.0 / m0;
  dec.exceptional = detail::exceptional_case(gx.diag, m.entries, c0, dec.kappa0, exceptional_tol);
  dec.alpha = ce.dot(gx.diag.cwiseProduct(c0));
  const Eigen::VectorXd eta = ce - dec.alpha * c0;
  dec.beta = eta.dot(gh.diag.cwiseProduct(c0)) / c0.dot(gh.diag.cwiseProduct(c0));
  const Eigen::VectorXd xi = eta - dec.beta * c0;
  dec.eta_norm_x = std::sqrt(eta.dot(gx.diag.cwiseProduct(eta)));
  dec.xi_norm_x = std::sqrt(xi.dot(gx.diag.cwiseProduct(xi)));

  if (eps > 0.0) {
    dec.kappa_eps = (pair.lambda - principal.lambda) / eps;
  } else {
    if (std::abs(pair.lambda - principal.lambda) > 1e-9 * std::max(1.0, std::abs(principal.lambda)))
      throw std::invalid_argument("decompose: eps = 0 but lambda differs from the principal eigenvalue");
    dec.kappa_eps = dec.kappa0;
  }

  if (!dec.exceptional && eps > 0.0) {
    const double denom = dec.alpha + dec.beta;
    const double predicted = dec.kappa0 * dec.alpha / denom;
    if (!(denom > 0.0) || std::abs(dec.kappa_eps - predicted) > kappa_tol * dec.kappa0)
      throw std::runtime_error("decompose: kappa identity violated; inputs are not a matching pencil family");
  }
  return dec;
}

/// delta, s_* window of the perturbation argument for the weight g0.
/// Default delta is a quarter of the spectral gap (the argument needs
/// 2 delta < gap and keeps slack for the chained bound).
inline StabilityWindow stability_window(const DomainSpec& domain, const GridValues& g0,
                                        double delta = 0.0) {
  require_same_domain(domain, g0.domain, "stability_window");
  BasisTables T(domain);
  detail::check_weight_admissible(T, g0);
  const GramX gx = gram_x(domain);
  const GramH1 gh = gram_h1(domain);
  const MassMatrix m = mass(T, g0);
  auto sol = positive_pencil_eigs(gh.diag, m.entries, 2, detail::weight_summary(g0));
  const double gap = sol.lambdas[1] - sol.lambdas[0];
  if (gap <= 1e-10 * std::max(1.0, sol.lambdas[0]))
    throw std::runtime_error("stability_window: degenerate spectral gap (principal eigenvalue not simple)");
  if (delta == 0.0) delta = gap / 4.0;
  if (!(delta > 0.0) || !(2.0 * delta < gap))
    throw std::invalid_argument("stability_window: delta must satisfy 0 < 2*delta < gap");

  Field u0{domain, sol.vectors[0]};
  detail::x_normalize_sign_fix(u0, gx.diag);
  const double m0 = u0.coeffs.dot(m.entries * u0.coeffs);
  StabilityWindow w;
  w.delta = delta;
  w.s_star = (gap - 2.0 * delta) / (1.0 + delta) * m0;
  w.n_threshold_note =
      "window is uniform over weight perturbations whose principal eigenvalue and weighted "
      "mass ratio stay within delta of the reference; no finite threshold index is computable "
      "from the reference weight alone";
  return w;
}

struct BoundsRow {
  double eps = 0.0;
  double lambda = 0.0;
  Decomposition dec;
  bool rayleigh_bracket = false;   // lambda0 <= lambda_eps <= lambda0 + eps/||u0||^2_g
  bool kappa_positive = false;     // kappa_eps > 0
  bool alpha_in_range = false;     // 0 < alpha <= 1
  bool beta_sign = false;          // beta > 0 for eps != 0 (non-exceptional), beta = 0 at eps = 0
  bool kappa_upper = false;        // kappa_eps <= 1/||u0||^2_g
  bool below_second_gap = false;   // lambda_eps <= lambda2 - delta
  bool eta_sq_bound = false;       // ||eta||_X^2 < alpha beta (strict, eps != 0, non-exceptional)
  bool normalization_split = false;  // alpha^2 + ||eta||_X^2 = 1
  bool kappa_consistent = false;   // kappa_eps = kappa0 alpha/(alpha+beta)
};

struct BoundsCheck {
  std::string name;
  bool pass = false;
  double slack = 0.0;  // min over rows of (bound - value); >= 0 iff pass
};

struct BoundsReport {
  std::vector<BoundsRow> rows;
  std::vector<BoundsCheck> checks;
  bool all_pass = false;
  double lambda0 = 0.0;
  double lambda_second = 0.0;
  double mass_u0 = 0.0;  // ||u0||^2_{L2_g}
};

/// Evaluates the whole inequality chain of the perturbation argument on a
/// computed curve: Rayleigh bracket, positivity of kappa, the alpha/beta
/// ranges, the uniform bound below the second eigenvalue, the strict
/// eta^2 < alpha beta estimate, the normalization split and the kappa
/// identity.  Report-valued; rows never throw.
inline BoundsReport verify_bounds(const PerturbedCurve& curve,
                                  const std::vector<Decomposition>& decomps,
                                  const StabilityWindow& window, const DomainSpec& domain,
                                  const GridValues& g) {
  if (curve.pairs.size() != decomps.size())
    throw std::invalid_argument("verify_bounds: curve and decompositions must align");
  BasisTables T(domain);
  const MassMatrix m = mass(T, g);
  const GramH1 gh = gram_h1(domain);
  auto sol = positive_pencil_eigs(gh.diag, m.entries, 2, detail::weight_summary(g));
  BoundsReport rep;
  rep.lambda0 = sol.lambdas[0];
  rep.lambda_second = sol.lambdas[1];
  const EigenPair& base = curve.pairs.front().second;
  rep.mass_u0 = base.u.coeffs.dot(m.entries * base.u.coeffs);

  for (const auto& [eps, pair] : curve.pairs) {
    (void)pair;
    if (eps > window.s_star * (1.0 + 1e-12))
      throw std::invalid_argument("verify_bounds: eps grid exceeds the stability window");
  }

  struct Agg {
    double slack = std::numeric_limits<double>::infinity();
    void take(double s) { slack = std::min(slack, s); }
  };
  Agg a_ray, a_kpos, a_alpha, a_beta, a_kup, a_gap, a_eta, a_split, a_kcons;

  const double tol = 1e-9;
  for (std::size_t i = 0; i < curve.pairs.size(); ++i) {
    const double eps = curve.pairs[i].first;
    const EigenPair& p = curve.pairs[i].second;
    const Decomposition& d = decomps[i];
    BoundsRow row;
    row.eps = eps;
    row.lambda = p.lambda;
    row.dec = d;

    const double upper = rep.lambda0 + eps / rep.mass_u0;
    row.rayleigh_bracket = (p.lambda >= rep.lambda0 - tol) && (p.lambda <= upper + tol);
    a_ray.take(std::min(p.lambda - rep.lambda0 + tol, upper - p.lambda + tol));

    row.kappa_positive = d.kappa_eps > 0.0;
    a_kpos.take(d.kappa_eps);

    row.alpha_in_range = d.alpha > 0.0 && d.alpha <= 1.0 + 1e-12;
    a_alpha.take(std::min(d.alpha, 1.0 + 1e-12 - d.alpha));

    if (eps == 0.0 || d.exceptional) {
      row.beta_sign = std::abs(d.beta) <= 1e-10;
      a_beta.take(1e-10 - std::abs(d.beta));
    } else {
      row.beta_sign = d.beta > 0.0;
      a_beta.take(d.beta);
    }

    row.kappa_upper = d.kappa_eps <= (1.0 + 1e-9) / rep.mass_u0;
    a_kup.take((1.0 + 1e-9) / rep.mass_u0 - d.kappa_eps);

    row.below_second_gap = p.lambda <= rep.lambda_second - window.delta + tol;
    a_gap.take(rep.lambda_second - window.delta + tol - p.lambda);

    if (eps == 0.0 || d.exceptional) {
      row.eta_sq_bound = d.eta_norm_x <= 1e-10;
      a_eta.take(1e-10 - d.eta_norm_x);
    } else {
      row.eta_sq_bound = d.eta_norm_x * d.eta_norm_x < d.alpha * d.beta;
      a_eta.take(d.alpha * d.beta - d.eta_norm_x * d.eta_norm_x);
    }

    const double split = std::abs(d.alpha * d.alpha + d.eta_norm_x * d.eta_norm_x - 1.0);
    row.normalization_split = split <= 1e-10;
    a_split.take(1e-10 - split);

    if (eps > 0.0 && !d.exceptional) {
      const double defect = std::abs(d.kappa_eps - d.kappa0 * d.alpha / (d.alpha + d.beta));
      row.kappa_consistent = defect <= 1e-8 * d.kappa0;
      a_kcons.take(1e-8 * d.kappa0 - defect);
    } else {
      row.kappa_consistent = true;
      a_kcons.take(0.0);
    }
    rep.rows.push_back(std::move(row));
  }

  const auto all_rows = [&](auto member) {
    for (const auto& r : rep.rows)
      if (!(r.*member)) return false;
    return true;
  };
  rep.checks = {
      {"rayleigh_bracket", all_rows(&BoundsRow::rayleigh_bracket), a_ray.slack},
      {"kappa_positive", all_rows(&BoundsRow::kappa_positive), a_kpos.slack},
      {"alpha_in_range", all_rows(&BoundsRow::alpha_in_range), a_alpha.slack},
      {"beta_sign", all_rows(&BoundsRow::beta_sign), a_beta.slack},
      {"kappa_upper_bound", all_rows(&BoundsRow::kappa_upper), a_kup.slack},
      {"below_second_gap", all_rows(&BoundsRow::below_second_gap), a_gap.slack},
      {"eta_sq_lt_alpha_beta", all_rows(&BoundsRow::eta_sq_bound), a_eta.slack},
      {"normalization_split", all_rows(&BoundsRow::normalization_split), a_split.slack},
      {"kappa_consistency", all_rows(&BoundsRow::kappa_consistent), a_kcons.slack},
  };
  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const BoundsCheck& c) { return c.pass; });
  return rep;
}

/// Simplicity decision from raw pencil data; exposed so degenerate pencils
/// (duplicated diagonal ratios) can be probed directly.
inline SimplicityReport simplicity_from_pencil(const Eigen::VectorXd& ddiag,
                                               const Eigen::MatrixXd& mass_entries,
                                               const Eigen::VectorXd& xdiag, double tol) {
  auto sol = positive_pencil_eigs(ddiag, mass_entries,
                                  std::min<int>(2, static_cast<int>(ddiag.size())), "pencil");
  SimplicityReport rep;
  rep.gap = sol.lambdas.size() > 1 ? sol.lambdas[1] - sol.lambdas[0]
                                   : std::numeric_limits<double>::infinity();
  rep.simple = rep.gap > tol * std::max(1.0, std::abs(sol.lambdas[0]));
  Eigen::VectorXd c = sol.vectors[0];
  const double nx = std::sqrt(c.dot(xdiag.cwiseProduct(c)));
  c /= nx;
  rep.kernel_projection = c.dot(xdiag.cwiseProduct(c));
  return rep;
}

/// Gap between the two smallest positive eigenvalues of the perturbed pencil,
/// plus the range-obstruction value <u,u>_X (always 1 after normalization,
/// reported as computed).
inline SimplicityReport simplicity_check(const DomainSpec& domain, const GridValues& g, double eps,
                                         double tol = 1e-8) {
  if (eps < 0.0) throw std::invalid_argument("simplicity_check: eps must be >= 0");
  require_same_domain(domain, g.domain, "simplicity_check");
  BasisTables T(domain);
  detail::check_weight_admissible(T, g);
  const GramX gx = gram_x(domain);
  const GramH1 gh = gram_h1(domain);
  const MassMatrix m = mass(T, g);
  const Eigen::VectorXd d = eps * gx.diag + gh.diag;
  return simplicity_from_pencil(d, m.entries, gx.diag, tol);
}

struct CompactnessProbe {
  Eigen::MatrixXd table;          // (n_weights x n_eps) deviations
  std::vector<double> headline;   // max over eps, per weight
  double max_deviation = 0.0;
};

/// Deviation of the eigenpair curves of a weight sequence from the curve of
/// the limit weight g0, in the R x X product metric, over a shared eps grid
/// inside the g0 stability window.
inline CompactnessProbe compactness_probe(const DomainSpec& domain,
                                          const std::vector<GridValues>& weights,
                                          const GridValues& g0, std::vector<double> eps_grid) {
  if (weights.empty() || eps_grid.empty())
    throw std::invalid_argument("compactness_probe: need at least one weight and one eps");
  const StabilityWindow w = stability_window(domain, g0);
  for (double e : eps_grid)
    if (e < 0.0 || e > w.s_star * (1.0 + 1e-12))
      throw std::invalid_argument("compactness_probe: eps grid must lie in [0, s_star]");
  const GramX gx = gram_x(domain);

  std::vector<EigenPair> ref;
  ref.reserve(eps_grid.size());
  for (double e : eps_grid) ref.push_back(perturbed_eigenpair(domain, g0, e));

  CompactnessProbe probe;
  probe.table.resize(static_cast<Eigen::Index>(weights.size()),
                     static_cast<Eigen::Index>(eps_grid.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double head = 0.0;
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      const EigenPair p = perturbed_eigenpair(domain, weights[i], eps_grid[j]);
      const Eigen::VectorXd du = p.u.coeffs - ref[j].u.coeffs;
      const double dx = std::sqrt(du.dot(gx.diag.cwiseProduct(du)));
      const double dev = std::hypot(p.lambda - ref[j].lambda, dx);
      probe.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dev;
      head = std::max(head, dev);
    }
    probe.headline.push_back(head);
    probe.max_deviation = std::max(probe.max_deviation, head);
  }
  return probe;
}

}  // namespace specgal
