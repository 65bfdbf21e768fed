#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace specgal;
using Catch::Approx;
using std::numbers::pi;

namespace {

GridValues one_plus_sin(const DomainSpec& d, double scale = 1.0) {
  return testsup::weight_from(d, [scale](const auto& x) { return 1.0 + scale * std::sin(x[0]); });
}

// frozen from a resolution-escalated solve (modes 64, quadrature 256) of the
// weight 1 + sin x on (0, pi); the desk-scale solve must match to 1e-8
constexpr double kLambda0OneSin = 0.5403188595585903;
constexpr double kLambda2OneSin = 2.3717868325462845;

}  // namespace

TEST_CASE("principal eigenpairs of the unit weight") {
  SECTION("interval: lambda = 1, u proportional to sin x") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const EigenPair p = principal_eigenpair(d, testsup::constant_weight(d));
    REQUIRE(p.lambda == Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(p.u.coeffs[0]) == Approx(1.0 / std::sqrt(4 * pi)).margin(1e-12));
    REQUIRE(p.u.coeffs.tail(7).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(p.u.coeffs[0] > 0.0);  // sign fixed by positive mean
    REQUIRE(p.residual < 1e-10);
  }
  SECTION("square: lambda = 2, u proportional to sin x sin y") {
    const DomainSpec d = DomainSpec::box(2, 4);
    const EigenPair p = principal_eigenpair(d, testsup::constant_weight(d));
    REQUIRE(p.lambda == Approx(2.0).margin(1e-11));
    const int i11 = flatten(d, BasisIndex{{1, 1, 1}});
    REQUIRE(std::abs(p.u.coeffs[i11]) == Approx(1.0 / std::sqrt(pi * pi / 4 * 30)).margin(1e-12));
  }
}

TEST_CASE("weighted principal eigenvalue matches the resolution-escalated oracle") {
  const DomainSpec d = DomainSpec::box(1, 16);
  const EigenPair p = principal_eigenpair(d, one_plus_sin(d));
  REQUIRE(std::abs(p.lambda - kLambda0OneSin) < 1e-8);
}

TEST_CASE("second eigenvalues") {
  const DomainSpec d1 = DomainSpec::box(1, 8);
  REQUIRE(second_eigenvalue(d1, testsup::constant_weight(d1)) == Approx(4.0).margin(1e-11));
  const DomainSpec d2 = DomainSpec::box(2, 4);
  REQUIRE(second_eigenvalue(d2, testsup::constant_weight(d2)) == Approx(5.0).margin(1e-10));
  const DomainSpec d16 = DomainSpec::box(1, 16);
  REQUIRE(std::abs(second_eigenvalue(d16, one_plus_sin(d16)) - kLambda2OneSin) < 5e-8);
}

TEST_CASE("perturbed eigenvalues of the unit weight are affine in eps") {
  SECTION("interval: 1 + 8 eps exactly") {
    const DomainSpec d = DomainSpec::box(1, 16);
    const GridValues g = testsup::constant_weight(d);
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
      const EigenPair p = perturbed_eigenpair(d, g, eps);
      REQUIRE(p.lambda == Approx(1.0 + 8.0 * eps).margin(1e-11));
    }
  }
  SECTION("square: 2 + 30 eps exactly") {
    const DomainSpec d = DomainSpec::box(2, 4);
    const GridValues g = testsup::constant_weight(d);
    for (double eps : {1e-3, 1e-2}) {
      const EigenPair p = perturbed_eigenpair(d, g, eps);
      REQUIRE(p.lambda == Approx(2.0 + 30.0 * eps).margin(1e-10));
    }
  }
  SECTION("eps = 0 coincides with the principal pair") {
    const DomainSpec d = DomainSpec::box(1, 12);
    const GridValues g = one_plus_sin(d);
    const EigenPair a = perturbed_eigenpair(d, g, 0.0);
    const EigenPair b = principal_eigenpair(d, g);
    REQUIRE(std::abs(a.lambda - b.lambda) < 1e-10);
    REQUIRE((a.u.coeffs - b.u.coeffs).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("negative eps is rejected") {
    const DomainSpec d = DomainSpec::box(1, 4);
    REQUIRE_THROWS_AS(perturbed_eigenpair(d, testsup::constant_weight(d), -1e-3),
                      std::invalid_argument);
  }
  SECTION("nonpositive weights fail loudly") {
    const DomainSpec d = DomainSpec::box(1, 4);
    REQUIRE_THROWS_WITH(principal_eigenpair(d, testsup::constant_weight(d, -1.0)),
                        Catch::Matchers::ContainsSubstring("no positive part"));
  }
}

TEST_CASE("perturbed curve") {
  const DomainSpec d = DomainSpec::box(1, 8);
  const GridValues g = testsup::constant_weight(d);
  SECTION("unit weight curve is 1 + 8 eps on the sample grid") {
    const PerturbedCurve c = perturbed_curve(d, g, {0.0, 0.01, 0.05, 0.1});
    std::vector<double> expect{1.0, 1.08, 1.4, 1.8};
    REQUIRE(c.pairs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      REQUIRE(c.pairs[i].second.lambda == Approx(expect[i]).margin(1e-11));
  }
  SECTION("singleton grid") {
    const PerturbedCurve c = perturbed_curve(d, g, {0.0});
    REQUIRE(c.pairs.size() == 1);
  }
  SECTION("grid without zero is rejected") {
    REQUIRE_THROWS_AS(perturbed_curve(d, g, {0.01, 0.1}), std::invalid_argument);
  }
  SECTION("curve continuity proxy: consecutive X-distances shrink under refinement") {
    // the curve is steepest near eps = 0 (the strong form suppresses high
    // modes at scales eps ~ k^2 / weight of mode k), so the refinement study
    // uses geometric grids that keep resolving that end
    const DomainSpec dw = DomainSpec::box(1, 4);
    const GridValues gw = one_plus_sin(dw);
    const StabilityWindow w = stability_window(dw, gw);
    const Eigen::VectorXd xd = gram_x(dw).diag;
    const auto max_gap = [&](int n) {
      std::vector<double> grid{0.0};
      const double lo = 1e-8;
      for (int i = 0; i < n; ++i)
        grid.push_back(lo * std::pow(w.s_star / lo, double(i) / (n - 1)));
      const PerturbedCurve c = perturbed_curve(dw, gw, grid);
      double worst = 0.0;
      for (std::size_t i = 1; i < c.pairs.size(); ++i) {
        const Eigen::VectorXd du = c.pairs[i].second.u.coeffs - c.pairs[i - 1].second.u.coeffs;
        worst = std::max(worst, std::sqrt(du.dot(xd.cwiseProduct(du))));
      }
      return worst;
    };
    const double coarse = max_gap(9);
    const double fine = max_gap(33);
    REQUIRE(fine < 0.6 * coarse);
  }
}

TEST_CASE("auxiliary spectrum") {
  SECTION("unit weight: ratios of the diagonal forms, exceptional flag set") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const AuxSpectrum aux = aux_spectrum(d, testsup::constant_weight(d), 3);
    REQUIRE(aux.lambdas[0] == Approx(8.0).margin(1e-10));
    REQUIRE(aux.lambdas[1] == Approx(5465.0).epsilon(1e-12));
    REQUIRE(aux.exceptional_index.has_value());
    REQUIRE(*aux.exceptional_index == 0);
    REQUIRE(aux.kappa0 == Approx(8.0).margin(1e-10));
  }
  SECTION("perturbed weight: not exceptional, kappa0 bracketed") {
    const DomainSpec d = DomainSpec::box(1, 16);
    const AuxSpectrum aux = aux_spectrum(d, one_plus_sin(d), 5);
    REQUIRE_FALSE(aux.exceptional_index.has_value());
    REQUIRE(aux.bracket_index.has_value());
    const int i = *aux.bracket_index;
    REQUIRE(aux.lambdas[static_cast<std::size_t>(i)] < aux.kappa0);
    REQUIRE(aux.kappa0 < aux.lambdas[static_cast<std::size_t>(i) + 1]);
    for (std::size_t k = 1; k < aux.lambdas.size(); ++k)
      REQUIRE(aux.lambdas[k] > aux.lambdas[k - 1]);
  }
}

TEST_CASE("decomposition") {
  SECTION("exceptional unit weight: alpha 1, beta 0, eta 0, kappa 8") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const GridValues g = testsup::constant_weight(d);
    const EigenPair p0 = principal_eigenpair(d, g);
    const EigenPair pe = perturbed_eigenpair(d, g, 0.05);
    const Decomposition dec = decompose(pe, 0.05, p0, d, g);
    REQUIRE(dec.exceptional);
    REQUIRE(dec.alpha == Approx(1.0).margin(1e-10));
    REQUIRE(std::abs(dec.beta) < 1e-10);
    REQUIRE(dec.eta_norm_x < 1e-10);
    REQUIRE(dec.xi_norm_x < 1e-10);
    REQUIRE(dec.kappa_eps == Approx(8.0).margin(1e-9));
    REQUIRE(dec.kappa0 == Approx(8.0).margin(1e-10));
  }
  SECTION("eps = 0 is the identity split") {
    const DomainSpec d = DomainSpec::box(1, 12);
    const GridValues g = one_plus_sin(d);
    const EigenPair p0 = principal_eigenpair(d, g);
    const Decomposition dec = decompose(p0, 0.0, p0, d, g);
    REQUIRE(dec.alpha == Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(dec.beta) < 1e-12);
    REQUIRE(dec.kappa_eps == Approx(dec.kappa0).margin(1e-12));
  }
  SECTION("weight 1 + sin x at eps = 0.05, frozen oracle values") {
    const DomainSpec d = DomainSpec::box(1, 16);
    const GridValues g = one_plus_sin(d);
    const EigenPair p0 = principal_eigenpair(d, g);
    const EigenPair pe = perturbed_eigenpair(d, g, 0.05);
    const Decomposition dec = decompose(pe, 0.05, p0, d, g);
    REQUIRE_FALSE(dec.exceptional);
    REQUIRE(dec.alpha == Approx(0.077143964939404).margin(1e-9));
    REQUIRE(dec.beta == Approx(12.917992416991751).epsilon(1e-8));
    REQUIRE(dec.alpha > 0.0);
    REQUIRE(dec.alpha <= 1.0);
    REQUIRE(dec.beta > 0.0);
    REQUIRE(dec.alpha * dec.alpha + dec.eta_norm_x * dec.eta_norm_x == Approx(1.0).margin(1e-10));
  }
  SECTION("eps = 0 with a mismatched eigenvalue is rejected") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const GridValues g = testsup::constant_weight(d);
    const EigenPair p0 = principal_eigenpair(d, g);
    const EigenPair pe = perturbed_eigenpair(d, g, 0.1);
    REQUIRE_THROWS_AS(decompose(pe, 0.0, p0, d, g), std::invalid_argument);
  }
}

TEST_CASE("stability window") {
  const DomainSpec d = DomainSpec::box(1, 8);
  const GridValues g = testsup::constant_weight(d);
  SECTION("delta = 0.75 gives s_* = 3/28") {
    const StabilityWindow w = stability_window(d, g, 0.75);
    REQUIRE(w.s_star == Approx(3.0 / 28).margin(1e-11));
  }
  SECTION("delta = 0.5 gives s_* = 1/6") {
    const StabilityWindow w = stability_window(d, g, 0.5);
    REQUIRE(w.s_star == Approx(1.0 / 6).margin(1e-11));
  }
  SECTION("default delta is a quarter of the gap") {
    const StabilityWindow w = stability_window(d, g);
    REQUIRE(w.delta == Approx(0.75).margin(1e-11));
  }
  SECTION("delta violating 2 delta < gap is rejected") {
    REQUIRE_THROWS_AS(stability_window(d, g, 1.5), std::invalid_argument);
  }
}

TEST_CASE("bounds chain") {
  SECTION("unit weight saturates the upper Rayleigh bound and the kappa bound") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const GridValues g = testsup::constant_weight(d);
    const StabilityWindow w = stability_window(d, g);
    std::vector<double> grid;
    for (int i = 0; i < 6; ++i) grid.push_back(w.s_star * i / 5);
    const PerturbedCurve curve = perturbed_curve(d, g, grid);
    std::vector<Decomposition> decs;
    for (const auto& [eps, pair] : curve.pairs)
      decs.push_back(decompose(pair, eps, curve.pairs.front().second, d, g));
    const BoundsReport rep = verify_bounds(curve, decs, w, d, g);
    REQUIRE(rep.all_pass);
    for (const auto& row : rep.rows) {
      // exceptional case: lambda = lambda0 + eps * kappa0 saturates both ends
      REQUIRE(row.lambda == Approx(rep.lambda0 + row.eps / rep.mass_u0).margin(1e-10));
      REQUIRE(row.dec.kappa_eps == Approx(1.0 / rep.mass_u0).margin(1e-8));
    }
    REQUIRE(rep.rows.front().eps == 0.0);
    REQUIRE(std::abs(rep.rows.front().dec.beta) < 1e-12);
  }
  SECTION("weight 1 + sin(x)/2 passes the whole chain strictly") {
    const DomainSpec d = DomainSpec::box(1, 16);
    const GridValues g =
        testsup::weight_from(d, [](const auto& x) { return 1.0 + 0.5 * std::sin(x[0]); });
    const StabilityWindow w = stability_window(d, g);
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(w.s_star * i / 7);
    const PerturbedCurve curve = perturbed_curve(d, g, grid);
    std::vector<Decomposition> decs;
    for (const auto& [eps, pair] : curve.pairs)
      decs.push_back(decompose(pair, eps, curve.pairs.front().second, d, g));
    const BoundsReport rep = verify_bounds(curve, decs, w, d, g);
    REQUIRE(rep.all_pass);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      REQUIRE(rep.rows[i].dec.beta > 0.0);
      REQUIRE(rep.rows[i].dec.eta_norm_x * rep.rows[i].dec.eta_norm_x <
              rep.rows[i].dec.alpha * rep.rows[i].dec.beta);
    }
  }
  SECTION("grid beyond the window is rejected") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const GridValues g = testsup::constant_weight(d);
    const StabilityWindow w = stability_window(d, g);
    const PerturbedCurve curve = perturbed_curve(d, g, {0.0, 2.0 * w.s_star});
    std::vector<Decomposition> decs;
    for (const auto& [eps, pair] : curve.pairs)
      decs.push_back(decompose(pair, eps, curve.pairs.front().second, d, g));
    REQUIRE_THROWS_AS(verify_bounds(curve, decs, w, d, g), std::invalid_argument);
  }
}

TEST_CASE("simplicity of the perturbed pencil") {
  SECTION("unit weight: diagonal closed-form gap") {
    const DomainSpec d = DomainSpec::box(1, 8);
    const double eps = 0.01;
    const SimplicityReport rep = simplicity_check(d, testsup::constant_weight(d), eps);
    REQUIRE(rep.simple);
    REQUIRE(rep.gap == Approx(3.0 + (5465.0 - 8.0) * eps).epsilon(1e-10));
    REQUIRE(rep.kernel_projection == Approx(1.0).margin(1e-12));
  }
  SECTION("synthetic double eigenvalue is flagged non-simple") {
    Eigen::VectorXd d(3);
    d << 1.0, 1.0, 5.0;
    const Eigen::MatrixXd mass = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd xd(3);
    xd << 1.0, 1.0, 1.0;
    const SimplicityReport rep = simplicity_from_pencil(d, mass, xd, 1e-8);
    REQUIRE_FALSE(rep.simple);
    REQUIRE(rep.gap == Approx(0.0).margin(1e-12));
  }
  SECTION("weighted case stays simple") {
    const DomainSpec d = DomainSpec::box(1, 16);
    const SimplicityReport rep = simplicity_check(d, one_plus_sin(d), 0.01);
    REQUIRE(rep.simple);
    REQUIRE(rep.gap > 0.1);
  }
}

TEST_CASE("eigen invariants on the weighted problem") {
  const DomainSpec d = DomainSpec::box(1, 16);
  const GridValues g = one_plus_sin(d);
  const StabilityWindow w = stability_window(d, g);
  const MassMatrix m = mass(d, g);
  const GramX gx = gram_x(d);
  const GramH1 gh = gram_h1(d);
  const EigenPair p0 = principal_eigenpair(d, g);
  const double m0 = p0.u.coeffs.dot(m.entries * p0.u.coeffs);

  for (double frac : {0.25, 0.5, 1.0}) {
    const double eps = frac * w.s_star;
    const EigenPair pe = perturbed_eigenpair(d, g, eps);
    // Rayleigh bracket survives Galerkin truncation verbatim
    REQUIRE(pe.lambda >= p0.lambda - 1e-9);
    REQUIRE(pe.lambda <= p0.lambda + eps / m0 + 1e-9);
    // pencil residual in the natural norm
    REQUIRE(pe.residual < 1e-10);
    const Decomposition dec = decompose(pe, eps, p0, d, g);
    // normalization split
    REQUIRE(dec.alpha * dec.alpha + dec.eta_norm_x * dec.eta_norm_x == Approx(1.0).margin(1e-10));
    // kappa identity
    REQUIRE(std::abs(dec.kappa_eps - dec.kappa0 * dec.alpha / (dec.alpha + dec.beta)) <=
            1e-8 * dec.kappa0);
    // grad-orthogonality of xi transfers to the weighted form
    const Eigen::VectorXd xi =
        pe.u.coeffs - (dec.alpha + dec.beta) * p0.u.coeffs;
    REQUIRE(std::abs(xi.dot(gh.diag.cwiseProduct(p0.u.coeffs))) < 1e-10);
    REQUIRE(std::abs(xi.dot(m.entries * p0.u.coeffs)) < 1e-10);
  }
  (void)gx;
}

TEST_CASE("exceptional affine law on the unit weight") {
  const DomainSpec d = DomainSpec::box(1, 12);
  const GridValues g = testsup::constant_weight(d);
  const EigenPair p0 = principal_eigenpair(d, g);
  for (double eps : {1e-3, 1e-2, 1e-1}) {
    const EigenPair p = perturbed_eigenpair(d, g, eps);
    REQUIRE(p.lambda == Approx(p0.lambda + 8.0 * eps).margin(1e-10));
    REQUIRE((p.u.coeffs - p0.u.coeffs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("compactness probe") {
  const DomainSpec d = DomainSpec::box(1, 8);
  const GridValues g0 = testsup::constant_weight(d);
  const StabilityWindow w = stability_window(d, g0);
  std::vector<double> grid{0.0, w.s_star / 2, w.s_star};

  SECTION("constant sequence has zero deviation") {
    const CompactnessProbe p = compactness_probe(d, {g0, g0}, g0, grid);
    REQUIRE(p.max_deviation < 1e-12);
  }
  SECTION("shrinking perturbations give strictly decreasing headlines") {
    std::vector<GridValues> seq;
    for (double n : {1.0, 2.0, 4.0}) seq.push_back(one_plus_sin(d, 1.0 / n));
    const CompactnessProbe p = compactness_probe(d, seq, g0, grid);
    REQUIRE(p.headline.size() == 3);
    REQUIRE(p.headline[0] > p.headline[1]);
    REQUIRE(p.headline[1] > p.headline[2]);
  }
  SECTION("singleton grid reduces to eigenpair convergence") {
    std::vector<GridValues> seq;
    for (double n : {2.0, 8.0}) seq.push_back(one_plus_sin(d, 1.0 / n));
    const CompactnessProbe p = compactness_probe(d, seq, g0, {0.0});
    REQUIRE(p.table.cols() == 1);
    REQUIRE(p.table(1, 0) < p.table(0, 0));
  }
  SECTION("grid beyond the window is rejected") {
    REQUIRE_THROWS_AS(compactness_probe(d, {g0}, g0, {2.0 * w.s_star}), std::invalid_argument);
  }
}
