#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace specgal {

/// Tensor-product box (0,L_1) x ... x (0,L_dim) with a homogeneous Dirichlet
/// sine basis of `modes` modes per axis and a Gauss-Legendre grid of
/// `quad_order` points per axis.
///
/// The default quadrature order is 2*modes + 16.  Two sine factors of mode
/// <= M produce frequencies up to 2M, and an n-point Gauss rule on (0,pi)
/// resolves frequency w to ~1e-13 once n >= w + 14 (measured); the +16
/// keeps mass assembly at machine precision with room for a smooth weight.
/// Quartic and quintic basis products (frequencies up to 4M and 5M) need a
/// raised quad_order -- integrals of such products alias at the default
/// order, so escalate quad_order toward 4*modes+16 when those terms must be
/// exact rather than merely small.
struct DomainSpec {
  int dim = 1;
  int modes = 1;
  int quad_order = 0;
  std::array<double, 3> lengths{std::numbers::pi, std::numbers::pi, std::numbers::pi};

  static DomainSpec box(int dim, int modes, std::array<double, 3> lengths = {std::numbers::pi, std::numbers::pi, std::numbers::pi},
                        int quad_order = 0) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("DomainSpec: dim must be 1, 2 or 3");
    if (modes < 1) throw std::invalid_argument("DomainSpec: modes must be >= 1");
    for (int i = 0; i < dim; ++i)
      if (!(lengths[static_cast<std::size_t>(i)] > 0.0))
        throw std::invalid_argument("DomainSpec: lengths must be strictly positive");
    DomainSpec d;
    d.dim = dim;
    d.modes = modes;
    d.lengths = lengths;
    d.quad_order = quad_order > 0 ? quad_order : 2 * modes + 16;
    if (d.quad_order < 2 * modes)
      throw std::invalid_argument("DomainSpec: quad_order must be >= 2*modes");
    return d;
  }

  int basis_size() const {
    int n = 1;
    for (int i = 0; i < dim; ++i) n *= modes;
    return n;
  }
  int grid_size() const {
    int n = 1;
    for (int i = 0; i < dim; ++i) n *= quad_order;
    return n;
  }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= lengths[static_cast<std::size_t>(i)];
    return v;
  }

  bool operator==(const DomainSpec& o) const {
    if (dim != o.dim || modes != o.modes || quad_order != o.quad_order) return false;
    for (int i = 0; i < dim; ++i)
      if (lengths[static_cast<std::size_t>(i)] != o.lengths[static_cast<std::size_t>(i)]) return false;
    return true;
  }
  bool operator!=(const DomainSpec& o) const { return !(*this == o); }
};

/// Per-axis mode numbers, 1-based: k_i in {1..modes}.
struct BasisIndex {
  std::array<int, 3> k{1, 1, 1};
};

/// Lexicographic flattening, axis 0 most significant.  Stable: the inverse
/// of unflatten for every admissible index.
inline int flatten(const DomainSpec& d, const BasisIndex& idx) {
  int flat = 0;
  for (int i = 0; i < d.dim; ++i) {
    const int ki = idx.k[static_cast<std::size_t>(i)];
    if (ki < 1 || ki > d.modes) throw std::invalid_argument("flatten: mode index out of range");
    flat = flat * d.modes + (ki - 1);
  }
  return flat;
}

inline BasisIndex unflatten(const DomainSpec& d, int flat) {
  if (flat < 0 || flat >= d.basis_size()) throw std::invalid_argument("unflatten: flat index out of range");
  BasisIndex idx;
  for (int i = d.dim - 1; i >= 0; --i) {
    idx.k[static_cast<std::size_t>(i)] = flat % d.modes + 1;
    flat /= d.modes;
  }
  return idx;
}

/// Coefficient vector over the tensor sine basis; coeffs[flatten(k)]
/// multiplies prod_i sin(k_i pi x_i / L_i).
struct Field {
  DomainSpec domain;
  Eigen::VectorXd coeffs;
};

inline Field make_field(const DomainSpec& d, Eigen::VectorXd coeffs) {
  if (coeffs.size() != d.basis_size()) throw std::invalid_argument("make_field: coefficient size mismatch");
  if (!coeffs.allFinite()) throw std::invalid_argument("make_field: coefficients must be finite");
  return Field{d, std::move(coeffs)};
}

inline Field zero_field(const DomainSpec& d) { return Field{d, Eigen::VectorXd::Zero(d.basis_size())}; }

/// Values on the tensor Gauss grid, flattened lexicographically
/// (axis 0 most significant), quad_order^dim entries.
struct GridValues {
  DomainSpec domain;
  Eigen::VectorXd values;
};

inline void require_same_domain(const DomainSpec& a, const DomainSpec& b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": domains differ");
}

}  // namespace specgal
