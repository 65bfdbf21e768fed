#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace specgal;
using Catch::Approx;
using std::numbers::pi;

TEST_CASE("gram_x closed forms") {
  SECTION("unit interval mode 1: (pi/2) * 8 = 4 pi") {
    const GramX g = gram_x(DomainSpec::box(1, 1));
    REQUIRE(g.diag[0] == Approx(4 * pi).margin(1e-12));
  }
  SECTION("mode 2: geometric sum of 4^j plus the gradient term") {
    const GramX g = gram_x(DomainSpec::box(1, 2));
    REQUIRE(g.diag[1] == Approx(pi / 2 * 5465.0).epsilon(1e-14));
  }
  SECTION("square, mode (1,1): 28 multi-indices plus |k|^2 = 2") {
    const GramX g = gram_x(DomainSpec::box(2, 2));
    REQUIRE(g.diag[0] == Approx(pi * pi / 4 * 30.0).epsilon(1e-14));
  }
}

TEST_CASE("gram_h1 closed forms") {
  REQUIRE(gram_h1(DomainSpec::box(1, 1)).diag[0] == Approx(pi / 2).margin(1e-14));
  REQUIRE(gram_h1(DomainSpec::box(1, 3)).diag[2] == Approx(9 * pi / 2).margin(1e-13));
  const DomainSpec d2 = DomainSpec::box(2, 2);
  REQUIRE(gram_h1(d2).diag[flatten(d2, BasisIndex{{1, 2, 1}})] ==
          Approx(pi * pi / 4 * 5.0).epsilon(1e-14));
}

TEST_CASE("mass matrix assembly") {
  const DomainSpec d = DomainSpec::box(1, 16);

  SECTION("unit weight is (pi/2) I to 1e-12") {
    const MassMatrix m = mass(d, testsup::constant_weight(d));
    const Eigen::MatrixXd err = m.entries - pi / 2 * Eigen::MatrixXd::Identity(16, 16);
    REQUIRE(err.cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("zero weight gives the zero matrix") {
    const MassMatrix m = mass(d, testsup::constant_weight(d, 0.0));
    REQUIRE(m.entries.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("weight 1 + sin x against the high-resolution oracle") {
    const GridValues g = testsup::weight_from(d, [](const auto& x) { return 1.0 + std::sin(x[0]); });
    const MassMatrix m = mass(d, g);
    // modes (1,2): parity makes the entry vanish
    const double o12 = testsup::quad_oracle_1d(
        [](double x) { return (1.0 + std::sin(x)) * std::sin(x) * std::sin(2 * x); }, pi);
    REQUIRE(o12 == Approx(0.0).margin(1e-13));
    REQUIRE(m.entries(0, 1) == Approx(o12).margin(1e-12));
    // modes (1,3): oracle value, equal to the closed form -4/15
    const double o13 = testsup::quad_oracle_1d(
        [](double x) { return (1.0 + std::sin(x)) * std::sin(x) * std::sin(3 * x); }, pi);
    REQUIRE(o13 == Approx(-4.0 / 15).margin(1e-12));
    REQUIRE(m.entries(0, 2) == Approx(-4.0 / 15).margin(1e-11));
  }
  SECTION("symmetry is exact") {
    const GridValues g = testsup::weight_from(d, [](const auto& x) { return 1.0 + std::sin(3 * x[0]); });
    const MassMatrix m = mass(d, g);
    REQUIRE((m.entries - m.entries.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Loewner ordering of the three forms") {
  std::mt19937_64 rng(42);
  for (int dim : {1, 2}) {
    const DomainSpec d = DomainSpec::box(dim, dim == 1 ? 12 : 5);
    const GramX gx = gram_x(d);
    const GramH1 gh = gram_h1(d);
    const MassMatrix m1 = mass(d, testsup::constant_weight(d));
    const double lam0 = dirichlet_lambda0(d);
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd c = testsup::random_x_vector(rng, gx.diag, 1.0);
      const double xq = c.dot(gx.diag.cwiseProduct(c));
      const double hq = c.dot(gh.diag.cwiseProduct(c));
      const double mq = c.dot(m1.entries * c);
      REQUIRE(xq >= hq);
      REQUIRE(hq >= lam0 * mq - 1e-9 * xq);
    }
  }
}

TEST_CASE("positive weights keep the mass form positive definite") {
  const DomainSpec d = DomainSpec::box(1, 10);
  const GridValues g =
      testsup::weight_from(d, [](const auto& x) { return 1.0 + 0.5 * std::sin(x[0]); });
  const MassMatrix m = mass(d, g);
  const MassMatrix m1 = mass(d, testsup::constant_weight(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(m.entries), e1(m1.entries);
  REQUIRE(eg.eigenvalues().minCoeff() >= 1.0 * e1.eigenvalues().minCoeff() - 1e-9);
}

TEST_CASE("sign-changing weights are admitted and may be indefinite") {
  const DomainSpec d = DomainSpec::box(1, 8);
  const GridValues g =
      testsup::weight_from(d, [](const auto& x) { return std::sin(x[0]) - 0.6; });
  const MassMatrix m = mass(d, g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries);
  REQUIRE(es.eigenvalues().minCoeff() < 0.0);
  REQUIRE(es.eigenvalues().maxCoeff() > 0.0);
}
