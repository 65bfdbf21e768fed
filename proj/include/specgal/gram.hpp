#pragma once

#include "specgal/basis.hpp"
#include "specgal/domain.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace specgal {

/// Diagonal Gram of the strong inner product: full H^6 Sobolev form
/// (all multi-indices |alpha| <= 6, unweighted) plus the H^1_0 form.
/// On a box the tensor sine basis is orthogonal in every H^m, so the
/// Gram stays diagonal and the eps-perturbation is a diagonal shift.
struct GramX {
  DomainSpec domain;
  Eigen::VectorXd diag;
};

struct GramH1 {
  DomainSpec domain;
  Eigen::VectorXd diag;
};

/// Dense symmetric weighted mass form, assembled by quadrature.  Positive
/// definite for weights positive on the grid; may be indefinite for
/// sign-changing weights (a queried property, not an invariant).
struct MassMatrix {
  DomainSpec domain;
  Eigen::MatrixXd entries;
};

namespace detail {

inline double half_volume(const DomainSpec& d) {
  double v = 1.0;
  for (int i = 0; i < d.dim; ++i) v *= d.lengths[static_cast<std::size_t>(i)] / 2.0;
  return v;
}

/// sum over multi-indices |alpha| <= 6 of prod_i kappa_i^(2 alpha_i)
inline double sobolev6_symbol(const DomainSpec& d, const BasisIndex& idx) {
  std::array<double, 3> k2{1.0, 1.0, 1.0};
  for (int i = 0; i < d.dim; ++i) {
    const double kap = idx.k[static_cast<std::size_t>(i)] * std::numbers::pi /
                       d.lengths[static_cast<std::size_t>(i)];
    k2[static_cast<std::size_t>(i)] = kap * kap;
  }
  double s = 0.0;
  if (d.dim == 1) {
    double p = 1.0;
    for (int a = 0; a <= 6; ++a) {
      s += p;
      p *= k2[0];
    }
  } else if (d.dim == 2) {
    for (int a0 = 0; a0 <= 6; ++a0)
      for (int a1 = 0; a1 + a0 <= 6; ++a1) s += std::pow(k2[0], a0) * std::pow(k2[1], a1);
  } else {
    for (int a0 = 0; a0 <= 6; ++a0)
      for (int a1 = 0; a1 + a0 <= 6; ++a1)
        for (int a2 = 0; a2 + a1 + a0 <= 6; ++a2)
          s += std::pow(k2[0], a0) * std::pow(k2[1], a1) * std::pow(k2[2], a2);
  }
  return s;
}

inline double grad_symbol(const DomainSpec& d, const BasisIndex& idx) {
  double s = 0.0;
  for (int i = 0; i < d.dim; ++i) {
    const double kap = idx.k[static_cast<std::size_t>(i)] * std::numbers::pi /
                       d.lengths[static_cast<std::size_t>(i)];
    s += kap * kap;
  }
  return s;
}

}  // namespace detail

inline GramX gram_x(const DomainSpec& d) {
  const double vh = detail::half_volume(d);
  Eigen::VectorXd diag(d.basis_size());
  for (int flat = 0; flat < d.basis_size(); ++flat) {
    const BasisIndex idx = unflatten(d, flat);
    diag[flat] = vh * (detail::sobolev6_symbol(d, idx) + detail::grad_symbol(d, idx));
  }
  return GramX{d, std::move(diag)};
}

inline GramH1 gram_h1(const DomainSpec& d) {
  const double vh = detail::half_volume(d);
  Eigen::VectorXd diag(d.basis_size());
  for (int flat = 0; flat < d.basis_size(); ++flat)
    diag[flat] = vh * detail::grad_symbol(d, unflatten(d, flat));
  return GramH1{d, std::move(diag)};
}

inline MassMatrix mass(const DomainSpec& d, const GridValues& g) {
  require_same_domain(d, g.domain, "mass");
  if (!g.values.allFinite()) throw std::invalid_argument("mass: weight must be finite on the grid");
  BasisTables T(d);
  Eigen::MatrixXd A = detail::assemble_bilinear(T, g.values, {0, 0, 0}, {0, 0, 0});
  A = 0.5 * (A + A.transpose()).eval();
  return MassMatrix{d, std::move(A)};
}

inline MassMatrix mass(const BasisTables& T, const GridValues& g) {
  require_same_domain(T.domain, g.domain, "mass");
  Eigen::MatrixXd A = detail::assemble_bilinear(T, g.values, {0, 0, 0}, {0, 0, 0});
  A = 0.5 * (A + A.transpose()).eval();
  return MassMatrix{T.domain, std::move(A)};
}

/// Smallest Dirichlet eigenvalue of -Laplace on the box, sum_i (pi/L_i)^2.
inline double dirichlet_lambda0(const DomainSpec& d) {
  double s = 0.0;
  for (int i = 0; i < d.dim; ++i) {
    const double k = std::numbers::pi / d.lengths[static_cast<std::size_t>(i)];
    s += k * k;
  }
  return s;
}

}  // namespace specgal
