#pragma once

#include "specgal/continuation.hpp"
#include "specgal/domain.hpp"
#include "specgal/nonlinear.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace specgal {

/// Configuration / schema errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WeightSpec {
  enum class Preset { constant, one_plus_sin_over_n, polynomial } preset = Preset::constant;
  double n = 1.0;                  // one_plus_sin_over_n
  std::vector<double> coeffs;      // polynomial in the first coordinate
};

struct RunConfig {
  // domain
  int dim = 1;
  int modes = 16;
  std::array<double, 3> lengths{std::numbers::pi, std::numbers::pi, std::numbers::pi};
  int quad_order = 0;  // 0 -> default

  WeightSpec weight;
  std::vector<double> eps_grid{0.0};

  // nonlinearity
  NonlinearityTag kind = NonlinearityTag::multiplicative;
  double eps2 = 0.0;  // 0 -> default to continuation eps (must end positive for additive)

  // continuation
  double cont_eps = 0.0;
  double ds = 1e-2;
  double radius = 1.0;
  int max_steps = 2000;
  double tol = 1e-10;
  int newton_max_iter = 25;
  int max_halvings = 6;
  double return_tol_factor = 10.0;

  // eigen knobs
  double delta = 0.0;  // 0 -> gap/4
  int aux_count = 5;
  double exceptional_tol = 1e-10;

  // sweep knobs
  int sign = +1;
  double mask_tol = 1e-8;
  std::vector<double> tail_targets{0.1, 0.05, 0.01};

  std::uint64_t seed = 0;

  DomainSpec domain_spec() const {
    return DomainSpec::box(dim, modes, lengths, quad_order);
  }

  GridValues weight_grid(const DomainSpec& d) const {
    BasisTables T(d);
    const int Q = d.quad_order;
    Eigen::VectorXd g(d.grid_size());
    for (int idx = 0; idx < d.grid_size(); ++idx) {
      int rem = idx;
      for (int i = d.dim - 1; i > 0; --i) rem /= Q;
      const double x0 = T.axis[0].nodes[rem];
      switch (weight.preset) {
        case WeightSpec::Preset::constant:
          g[idx] = 1.0;
          break;
        case WeightSpec::Preset::one_plus_sin_over_n:
          g[idx] = 1.0 + std::sin(std::numbers::pi * x0 / d.lengths[0]) / weight.n;
          break;
        case WeightSpec::Preset::polynomial: {
          double v = 0.0;
          for (std::size_t p = weight.coeffs.size(); p-- > 0;) v = v * x0 + weight.coeffs[p];
          g[idx] = v;
          break;
        }
      }
    }
    return GridValues{d, std::move(g)};
  }

  NonlinearityKind nonlinearity_kind() const {
    if (kind == NonlinearityTag::multiplicative) return NonlinearityKind::multiplicative();
    const double e2 = eps2 > 0.0 ? eps2 : cont_eps;
    if (!(e2 > 0.0))
      throw ConfigError("nonlinearity.eps2: additive_regularized needs eps2 > 0 (no default available when continuation.eps = 0)");
    return NonlinearityKind::additive_regularized(e2);
  }

  ContinuationParams continuation_params() const {
    ContinuationParams p;
    p.ds = ds;
    p.radius = radius;
    p.max_steps = max_steps;
    p.tol = tol;
    p.newton_max_iter = newton_max_iter;
    p.max_halvings = max_halvings;
    p.return_tol_factor = return_tol_factor;
    return p;
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError("unknown key '" + path + key + "'");
  }
}

template <typename T>
T get_as(const json& j, const std::string& path, const char* key, T fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("missing key '" + path + key + "'");
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + path + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::get_as;
  using detail::reject_unknown;
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(j, "", {"domain", "weight", "eps_grid", "nonlinearity", "continuation", "eigen", "sweep", "seed"});

  if (!j.contains("domain")) throw ConfigError("missing key 'domain'");
  {
    const auto& d = j.at("domain");
    reject_unknown(d, "domain.", {"dim", "modes", "lengths", "quad_order"});
    c.dim = get_as<int>(d, "domain.", "dim", 1, true);
    c.modes = get_as<int>(d, "domain.", "modes", 1, true);
    if (c.dim < 1 || c.dim > 3) throw ConfigError("domain.dim must be 1, 2 or 3");
    if (c.modes < 1) throw ConfigError("domain.modes must be >= 1");
    if (d.contains("lengths")) {
      const auto ls = get_as<std::vector<double>>(d, "domain.", "lengths", {}, true);
      if (static_cast<int>(ls.size()) != c.dim)
        throw ConfigError("domain.lengths must list one extent per axis");
      for (int i = 0; i < c.dim; ++i) {
        if (!(ls[static_cast<std::size_t>(i)] > 0.0)) throw ConfigError("domain.lengths must be positive");
        c.lengths[static_cast<std::size_t>(i)] = ls[static_cast<std::size_t>(i)];
      }
    }
    c.quad_order = get_as<int>(d, "domain.", "quad_order", 0);
    if (c.quad_order != 0 && c.quad_order < 2 * c.modes)
      throw ConfigError("domain.quad_order must be >= 2*modes");
  }

  if (j.contains("weight")) {
    const auto& w = j.at("weight");
    reject_unknown(w, "weight.", {"preset", "n", "coeffs"});
    const std::string preset = get_as<std::string>(w, "weight.", "preset", "constant", true);
    if (preset == "constant") {
      c.weight.preset = WeightSpec::Preset::constant;
    } else if (preset == "one_plus_sin_over_n") {
      c.weight.preset = WeightSpec::Preset::one_plus_sin_over_n;
      c.weight.n = get_as<double>(w, "weight.", "n", 1.0, true);
      if (!(c.weight.n > 0.0)) throw ConfigError("weight.n must be positive");
    } else if (preset == "polynomial") {
      c.weight.preset = WeightSpec::Preset::polynomial;
      c.weight.coeffs = get_as<std::vector<double>>(w, "weight.", "coeffs", {}, true);
      if (c.weight.coeffs.empty()) throw ConfigError("weight.coeffs must be nonempty");
    } else {
      throw ConfigError("weight.preset must be one of constant, one_plus_sin_over_n, polynomial");
    }
  }

  if (j.contains("eps_grid")) {
    c.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    if (c.eps_grid.empty()) throw ConfigError("eps_grid must be nonempty");
    for (double e : c.eps_grid)
      if (e < 0.0 || !std::isfinite(e)) throw ConfigError("eps_grid entries must be finite and >= 0");
  }

  if (j.contains("nonlinearity")) {
    const auto& n = j.at("nonlinearity");
    reject_unknown(n, "nonlinearity.", {"kind", "eps2"});
    const std::string kind = get_as<std::string>(n, "nonlinearity.", "kind", "multiplicative", true);
    if (kind == "multiplicative")
      c.kind = NonlinearityTag::multiplicative;
    else if (kind == "additive_regularized")
      c.kind = NonlinearityTag::additive_regularized;
    else
      throw ConfigError("nonlinearity.kind must be multiplicative or additive_regularized");
    c.eps2 = get_as<double>(n, "nonlinearity.", "eps2", 0.0);
    if (n.contains("eps2") && !(c.eps2 > 0.0)) throw ConfigError("nonlinearity.eps2 must be > 0");
  }

  if (j.contains("continuation")) {
    const auto& k = j.at("continuation");
    reject_unknown(k, "continuation.",
                   {"eps", "ds", "R", "max_steps", "tol", "newton_max_iter", "max_halvings",
                    "return_tol_factor"});
    c.cont_eps = get_as<double>(k, "continuation.", "eps", 0.0);
    c.ds = get_as<double>(k, "continuation.", "ds", 1e-2);
    c.radius = get_as<double>(k, "continuation.", "R", 1.0);
    c.max_steps = get_as<int>(k, "continuation.", "max_steps", 2000);
    c.tol = get_as<double>(k, "continuation.", "tol", 1e-10);
    c.newton_max_iter = get_as<int>(k, "continuation.", "newton_max_iter", 25);
    c.max_halvings = get_as<int>(k, "continuation.", "max_halvings", 6);
    c.return_tol_factor = get_as<double>(k, "continuation.", "return_tol_factor", 10.0);
    if (c.cont_eps < 0.0) throw ConfigError("continuation.eps must be >= 0");
    if (!(c.ds > 0.0) || !(c.radius > 0.0)) throw ConfigError("continuation.ds and continuation.R must be positive");
    if (!(c.tol > 0.0)) throw ConfigError("continuation.tol must be positive");
    if (c.max_steps < 1) throw ConfigError("continuation.max_steps must be >= 1");
  }

  if (j.contains("eigen")) {
    const auto& e = j.at("eigen");
    reject_unknown(e, "eigen.", {"delta", "aux_count", "exceptional_tol"});
    c.delta = get_as<double>(e, "eigen.", "delta", 0.0);
    c.aux_count = get_as<int>(e, "eigen.", "aux_count", 5);
    c.exceptional_tol = get_as<double>(e, "eigen.", "exceptional_tol", 1e-10);
    if (c.delta < 0.0) throw ConfigError("eigen.delta must be >= 0 (0 selects gap/4)");
    if (c.aux_count < 1) throw ConfigError("eigen.aux_count must be >= 1");
    if (!(c.exceptional_tol > 0.0)) throw ConfigError("eigen.exceptional_tol must be positive");
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    reject_unknown(s, "sweep.", {"sign", "mask_tol", "tail_targets"});
    c.sign = get_as<int>(s, "sweep.", "sign", +1);
    if (c.sign != 1 && c.sign != -1) throw ConfigError("sweep.sign must be 1 or -1");
    c.mask_tol = get_as<double>(s, "sweep.", "mask_tol", 1e-8);
    if (!(c.mask_tol > 0.0)) throw ConfigError("sweep.mask_tol must be positive");
    if (s.contains("tail_targets")) {
      c.tail_targets = s.at("tail_targets").get<std::vector<double>>();
      if (c.tail_targets.empty()) throw ConfigError("sweep.tail_targets must be nonempty");
    }
  }

  c.seed = detail::get_as<std::uint64_t>(j, "", "seed", 0);
  return c;
}

/// Loads and validates a config file; parse errors are reported with the
/// line that broke and schema errors with the offending key.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ": line " + std::to_string(line) + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace specgal
