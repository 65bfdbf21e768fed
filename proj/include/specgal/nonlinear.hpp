#pragma once

#include "specgal/basis.hpp"
#include "specgal/domain.hpp"
#include "specgal/eigensolve.hpp"
#include "specgal/gram.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>

namespace specgal {

enum class NonlinearityTag { multiplicative, additive_regularized, plugin };

/// Pointwise plug-in nonlinearity B(x, u, grad u, D^2 u) with its directional
/// derivative with respect to (u, grad u, D^2 u).  Hessian entries are packed
/// as [xx, yy, zz, xy, xz, yz]; unused slots are zero below the dimension.
struct PluginNonlinearity {
  using Point = std::array<double, 3>;
  using Grad = std::array<double, 3>;
  using Hess = std::array<double, 6>;
  std::function<double(const Point&, double, const Grad&, const Hess&)> value;
  std::function<double(const Point&, double, const Grad&, const Hess&, double, const Grad&, const Hess&)>
      derivative;
};

struct NonlinearityKind {
  NonlinearityTag tag = NonlinearityTag::multiplicative;
  double eps2 = 0.0;  // denominator regularizer, additive_regularized only
  std::shared_ptr<const PluginNonlinearity> plugin;

  static NonlinearityKind multiplicative() { return NonlinearityKind{}; }
  static NonlinearityKind additive_regularized(double eps2) {
    if (!(eps2 > 0.0))
      throw std::invalid_argument("additive_regularized nonlinearity requires eps2 > 0");
    return NonlinearityKind{NonlinearityTag::additive_regularized, eps2, nullptr};
  }
  static NonlinearityKind make_plugin(std::shared_ptr<const PluginNonlinearity> p) {
    if (!p || !p->value || !p->derivative)
      throw std::invalid_argument("plugin nonlinearity requires value and derivative callbacks");
    return NonlinearityKind{NonlinearityTag::plugin, 0.0, std::move(p)};
  }
};

struct NewtonResult {
  enum class Status { converged, no_convergence, singular_jacobian };
  Status status = Status::no_convergence;
  Eigen::VectorXd c;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Weak residual and analytic Jacobian of the Galerkin-projected nonlinear
/// problem.  Immutable after construction; all evaluation is pure, so one
/// system can serve concurrent branch traces.
class ResidualSystem {
 public:
  ResidualSystem(const DomainSpec& domain, NonlinearityKind kind, double eps)
      : domain_(domain), kind_(std::move(kind)), eps_(eps), tables_(domain) {
    if (eps < 0.0) throw std::invalid_argument("ResidualSystem: eps must be >= 0");
    xdiag_ = gram_x(domain).diag;
    h1diag_ = gram_h1(domain).diag;
    GridValues one{domain, Eigen::VectorXd::Ones(domain.grid_size())};
    mass1_ = mass(tables_, one).entries;
    if (kind_.tag == NonlinearityTag::plugin) cache_plugin_grid_geometry();
  }

  const DomainSpec& domain() const { return domain_; }
  const NonlinearityKind& kind() const { return kind_; }
  double eps() const { return eps_; }
  const BasisTables& tables() const { return tables_; }
  const Eigen::VectorXd& x_diag() const { return xdiag_; }
  const Eigen::VectorXd& h1_diag() const { return h1diag_; }
  const Eigen::MatrixXd& mass1() const { return mass1_; }

  double norm_x(const Eigen::VectorXd& c) const {
    return std::sqrt(c.dot(xdiag_.cwiseProduct(c)));
  }

  Eigen::VectorXd values_on_grid(const Eigen::VectorXd& c) const {
    return detail::eval_tensor(tables_, c, {0, 0, 0});
  }

  /// Weak nonlinear term N_j(c) (the lambda-free integrals).
  Eigen::VectorXd nonlinear_term(const Eigen::VectorXd& c) const {
    switch (kind_.tag) {
      case NonlinearityTag::multiplicative: {
        const Eigen::VectorXd det = hessian_determinant(tables_, Field{domain_, c}).values;
        const Eigen::VectorXd u = values_on_grid(c);
        return detail::assemble_load(tables_, (det.array().square() * u.array()).matrix());
      }
      case NonlinearityTag::additive_regularized: {
        const Eigen::VectorXd det = hessian_determinant(tables_, Field{domain_, c}).values;
        const Eigen::VectorXd u = values_on_grid(c);
        const Eigen::ArrayXd q = u.array().square() + kind_.eps2;
        return detail::assemble_load(tables_, (det.array().square() * u.array() / q).matrix());
      }
      case NonlinearityTag::plugin:
        return detail::assemble_load(tables_, plugin_values(c));
    }
    throw std::logic_error("unreachable");
  }

  Eigen::VectorXd residual(double lambda, const Eigen::VectorXd& c) const {
    check_input(c);
    Eigen::VectorXd r = (eps_ * xdiag_ + h1diag_).cwiseProduct(c) - lambda * (mass1_ * c);
    const Eigen::VectorXd n = nonlinear_term(c);
    if (kind_.tag == NonlinearityTag::multiplicative)
      r -= lambda * n;
    else
      r -= n;
    return r;
  }

  Eigen::VectorXd dresidual_dlambda(double /*lambda*/, const Eigen::VectorXd& c) const {
    check_input(c);
    Eigen::VectorXd d = -(mass1_ * c);
    if (kind_.tag == NonlinearityTag::multiplicative) d -= nonlinear_term(c);
    return d;
  }

  Eigen::MatrixXd jacobian(double lambda, const Eigen::VectorXd& c) const {
    check_input(c);
    Eigen::MatrixXd j = Eigen::MatrixXd((eps_ * xdiag_ + h1diag_).asDiagonal());
    j -= lambda * mass1_;
    switch (kind_.tag) {
      case NonlinearityTag::multiplicative:
        j -= lambda * multiplicative_dn(c);
        break;
      case NonlinearityTag::additive_regularized:
        j -= additive_dn(c);
        break;
      case NonlinearityTag::plugin:
        j -= plugin_dn(c);
        break;
    }
    return j;
  }

  /// lambda-fixed Newton with step halving.  Singular Jacobians (the trivial
  /// line at a bifurcation point) are reported distinctly from stalls.
  NewtonResult newton_correct(double lambda, Eigen::VectorXd c, double tol, int max_iter,
                              int max_halvings = 6) const {
    if (!(tol > 0.0)) throw std::invalid_argument("newton_correct: tol must be > 0");
    NewtonResult out;
    // singularity is judged against the scale of the linear part, not of the
    // factored matrix itself, so that a 1x1 system degenerating to ~0 at a
    // bifurcation point is still flagged
    const double scale = (eps_ * xdiag_ + h1diag_).cwiseAbs().maxCoeff() +
                         std::abs(lambda) * mass1_.cwiseAbs().maxCoeff();
    const auto singular = [&](const Eigen::MatrixXd& j) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
      return lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= 1e-13 * scale;
    };
    Eigen::VectorXd r = residual(lambda, c);
    double rn = r.norm();
    for (int it = 0; it < max_iter; ++it) {
      if (rn <= tol) {
        // a converged point with a singular Jacobian (the trivial line at a
        // bifurcation point) is reported distinctly: local uniqueness of the
        // correction cannot be certified there
        out.status = singular(jacobian(lambda, c)) ? NewtonResult::Status::singular_jacobian
                                                   : NewtonResult::Status::converged;
        out.c = c;
        out.iterations = it;
        out.residual_norm = rn;
        return out;
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(lambda, c));
      if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= 1e-13 * scale) {
        out.status = NewtonResult::Status::singular_jacobian;
        out.c = c;
        out.iterations = it;
        out.residual_norm = rn;
        return out;
      }
      const Eigen::VectorXd step = lu.solve(-r);
      double t = 1.0;
      for (int h = 0; h <= max_halvings; ++h) {
        Eigen::VectorXd cand = c + t * step;
        Eigen::VectorXd rc = residual(lambda, cand);
        if (rc.norm() < rn || h == max_halvings) {
          c = std::move(cand);
          r = std::move(rc);
          rn = r.norm();
          break;
        }
        t *= 0.5;
      }
    }
    out.status = rn <= tol ? NewtonResult::Status::converged : NewtonResult::Status::no_convergence;
    out.c = c;
    out.iterations = max_iter;
    out.residual_norm = rn;
    return out;
  }

  /// ||N(c)|| in the X-dual norm over ||c||_X; tends to zero with the
  /// homogeneity order of the nonlinearity minus one.
  double smallness_ratio(const Eigen::VectorXd& c) const {
    const double nx = norm_x(c);
    if (!(nx > 0.0)) throw std::invalid_argument("smallness_ratio: c must be nonzero");
    const Eigen::VectorXd n = nonlinear_term(c);
    const double dual = std::sqrt((n.array().square() / xdiag_.array()).sum());
    return dual / nx;
  }

  /// Log-log slope of the smallness ratio along the ray t*c, t in
  /// {1e-1, 1e-2, 1e-3}; used as the empirical decay order of a plug-in.
  double observed_decay_order(const Eigen::VectorXd& c) const {
    const double h1 = smallness_ratio(1e-1 * c);
    const double h3 = smallness_ratio(1e-3 * c);
    if (h1 <= 0.0 || h3 <= 0.0) return std::numeric_limits<double>::infinity();
    return (std::log(h1) - std::log(h3)) / (std::log(1e-1) - std::log(1e-3));
  }

 private:
  void check_input(const Eigen::VectorXd& c) const {
    if (c.size() != domain_.basis_size())
      throw std::invalid_argument("ResidualSystem: coefficient size mismatch");
    if (!c.allFinite()) throw std::invalid_argument("ResidualSystem: coefficients must be finite");
  }

  Eigen::MatrixXd multiplicative_dn(const Eigen::VectorXd& c) const {
    const Field f{domain_, c};
    const Eigen::VectorXd det = hessian_determinant(tables_, f).values;
    const Eigen::VectorXd u = values_on_grid(c);
    const Eigen::VectorXd two_det_u = (2.0 * det.array() * u.array()).matrix();
    Eigen::MatrixXd dn =
        detail::assemble_bilinear(tables_, det.array().square().matrix(), {0, 0, 0}, {0, 0, 0});
    dn += det_direction_blocks(f, two_det_u);
    return dn;
  }

  Eigen::MatrixXd additive_dn(const Eigen::VectorXd& c) const {
    const Field f{domain_, c};
    const Eigen::VectorXd det = hessian_determinant(tables_, f).values;
    const Eigen::VectorXd u = values_on_grid(c);
    const Eigen::ArrayXd q = u.array().square() + kind_.eps2;
    const Eigen::VectorXd wmass =
        (det.array().square() * (q - 2.0 * u.array().square()) / q.square()).matrix();
    const Eigen::VectorXd wdir = (2.0 * det.array() * u.array() / q).matrix();
    Eigen::MatrixXd dn = detail::assemble_bilinear(tables_, wmass, {0, 0, 0}, {0, 0, 0});
    dn += det_direction_blocks(f, wdir);
    return dn;
  }

  /// sum over Hessian slots of bilinear forms assembling
  /// int w(x) * dDet_u[phi_k] * phi_j dx, with w the given grid factor.
  Eigen::MatrixXd det_direction_blocks(const Field& f, const Eigen::VectorXd& w) const {
    const auto ev = [&](std::array<int, 3> o) { return detail::eval_tensor(tables_, f.coeffs, o); };
    const auto wb = [&](const Eigen::VectorXd& weight, std::array<int, 3> oR) {
      return detail::assemble_bilinear(tables_, weight, {0, 0, 0}, oR);
    };
    if (domain_.dim == 1) return wb(w, {2, 0, 0});
    if (domain_.dim == 2) {
      const Eigen::VectorXd uxx = ev({2, 0, 0}), uyy = ev({0, 2, 0}), uxy = ev({1, 1, 0});
      Eigen::MatrixXd dn = wb(w.cwiseProduct(uyy), {2, 0, 0});
      dn += wb(w.cwiseProduct(uxx), {0, 2, 0});
      dn -= 2.0 * wb(w.cwiseProduct(uxy), {1, 1, 0});
      return dn;
    }
    const Eigen::VectorXd uxx = ev({2, 0, 0}), uyy = ev({0, 2, 0}), uzz = ev({0, 0, 2});
    const Eigen::VectorXd uxy = ev({1, 1, 0}), uxz = ev({1, 0, 1}), uyz = ev({0, 1, 1});
    const Eigen::ArrayXd a11 = uyy.array() * uzz.array() - uyz.array().square();
    const Eigen::ArrayXd a22 = uxx.array() * uzz.array() - uxz.array().square();
    const Eigen::ArrayXd a33 = uxx.array() * uyy.array() - uxy.array().square();
    const Eigen::ArrayXd a12 = uxz.array() * uyz.array() - uxy.array() * uzz.array();
    const Eigen::ArrayXd a13 = uxy.array() * uyz.array() - uxz.array() * uyy.array();
    const Eigen::ArrayXd a23 = uxy.array() * uxz.array() - uxx.array() * uyz.array();
    Eigen::MatrixXd dn = wb((w.array() * a11).matrix(), {2, 0, 0});
    dn += wb((w.array() * a22).matrix(), {0, 2, 0});
    dn += wb((w.array() * a33).matrix(), {0, 0, 2});
    dn += 2.0 * wb((w.array() * a12).matrix(), {1, 1, 0});
    dn += 2.0 * wb((w.array() * a13).matrix(), {1, 0, 1});
    dn += 2.0 * wb((w.array() * a23).matrix(), {0, 1, 1});
    return dn;
  }

  void cache_plugin_grid_geometry() {
    const int Q = domain_.quad_order;
    points_.resize(static_cast<std::size_t>(domain_.grid_size()));
    for (int g = 0; g < domain_.grid_size(); ++g) {
      std::array<double, 3> x{0.0, 0.0, 0.0};
      int rem = g;
      for (int i = domain_.dim - 1; i >= 0; --i) {
        const int q = rem % Q;
        rem /= Q;
        x[static_cast<std::size_t>(i)] = tables_.axis[static_cast<std::size_t>(i)].nodes[q];
      }
      points_[static_cast<std::size_t>(g)] = x;
    }
  }

  struct PluginState {
    Eigen::VectorXd u;
    std::array<Eigen::VectorXd, 3> grad;
    std::array<Eigen::VectorXd, 6> hess;
  };

  PluginState plugin_state(const Eigen::VectorXd& c) const {
    const auto ev = [&](std::array<int, 3> o) { return detail::eval_tensor(tables_, c, o); };
    PluginState s;
    s.u = ev({0, 0, 0});
    const int n = domain_.grid_size();
    for (auto& v : s.grad) v = Eigen::VectorXd::Zero(n);
    for (auto& v : s.hess) v = Eigen::VectorXd::Zero(n);
    s.grad[0] = ev({1, 0, 0});
    s.hess[0] = ev({2, 0, 0});
    if (domain_.dim >= 2) {
      s.grad[1] = ev({0, 1, 0});
      s.hess[1] = ev({0, 2, 0});
      s.hess[3] = ev({1, 1, 0});
    }
    if (domain_.dim == 3) {
      s.grad[2] = ev({0, 0, 1});
      s.hess[2] = ev({0, 0, 2});
      s.hess[4] = ev({1, 0, 1});
      s.hess[5] = ev({0, 1, 1});
    }
    return s;
  }

  Eigen::VectorXd plugin_values(const Eigen::VectorXd& c) const {
    const PluginState s = plugin_state(c);
    const int n = domain_.grid_size();
    Eigen::VectorXd out(n);
    for (int g = 0; g < n; ++g) {
      const PluginNonlinearity::Grad gr{s.grad[0][g], s.grad[1][g], s.grad[2][g]};
      const PluginNonlinearity::Hess he{s.hess[0][g], s.hess[1][g], s.hess[2][g],
                                        s.hess[3][g], s.hess[4][g], s.hess[5][g]};
      out[g] = kind_.plugin->value(points_[static_cast<std::size_t>(g)], s.u[g], gr, he);
    }
    return out;
  }

  Eigen::MatrixXd plugin_dn(const Eigen::VectorXd& c) const {
    const PluginState s = plugin_state(c);
    const int n = domain_.grid_size();
    const int m = domain_.basis_size();
    Eigen::MatrixXd dn(m, m);
    Eigen::VectorXd ek = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < m; ++k) {
      ek.setZero();
      ek[k] = 1.0;
      const PluginState d = plugin_state(ek);
      Eigen::VectorXd col(n);
      for (int g = 0; g < n; ++g) {
        const PluginNonlinearity::Grad gr{s.grad[0][g], s.grad[1][g], s.grad[2][g]};
        const PluginNonlinearity::Hess he{s.hess[0][g], s.hess[1][g], s.hess[2][g],
                                          s.hess[3][g], s.hess[4][g], s.hess[5][g]};
        const PluginNonlinearity::Grad dgr{d.grad[0][g], d.grad[1][g], d.grad[2][g]};
        const PluginNonlinearity::Hess dhe{d.hess[0][g], d.hess[1][g], d.hess[2][g],
                                           d.hess[3][g], d.hess[4][g], d.hess[5][g]};
        col[g] = kind_.plugin->derivative(points_[static_cast<std::size_t>(g)], s.u[g], gr, he,
                                          d.u[g], dgr, dhe);
      }
      dn.col(k) = detail::assemble_load(tables_, col);
    }
    return dn;
  }

  DomainSpec domain_;
  NonlinearityKind kind_;
  double eps_;
  BasisTables tables_;
  Eigen::VectorXd xdiag_;
  Eigen::VectorXd h1diag_;
  Eigen::MatrixXd mass1_;
  std::vector<std::array<double, 3>> points_;  // plugin only
};

}  // namespace specgal
