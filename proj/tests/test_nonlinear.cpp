#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace specgal;
using Catch::Approx;
using std::numbers::pi;

namespace {

Eigen::VectorXd unit_mode(const DomainSpec& d, int flat, double amp) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d.basis_size());
  c[flat] = amp;
  return c;
}

}  // namespace

TEST_CASE("trivial line is preserved for every kind and every lambda") {
  const DomainSpec d = DomainSpec::box(1, 8);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d.basis_size());
  for (double lambda : {-0.3, 0.0, 0.7, 2.5}) {
    REQUIRE(ResidualSystem(d, NonlinearityKind::multiplicative(), 0.01)
                .residual(lambda, zero)
                .cwiseAbs()
                .maxCoeff() == 0.0);
    REQUIRE(ResidualSystem(d, NonlinearityKind::additive_regularized(1e-3), 0.0)
                .residual(lambda, zero)
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
}

TEST_CASE("one-mode closed forms in the single-mode space") {
  // with one sine mode the weak form reduces to
  //   R(a) = (pi/2) a - lambda ((pi/2) a + (3 pi/8) a^3)
  const DomainSpec d = DomainSpec::box(1, 1);
  ResidualSystem sys(d, NonlinearityKind::multiplicative(), 0.0);
  const double a = 0.3;
  const double law = 1.0 / (1.0 + 0.75 * a * a);

  SECTION("residual vanishes on the one-mode branch") {
    const Eigen::VectorXd r = sys.residual(law, unit_mode(d, 0, a));
    REQUIRE(std::abs(r[0]) < 1e-13);
  }
  SECTION("jacobian entry") {
    const Eigen::MatrixXd j = sys.jacobian(law, unit_mode(d, 0, a));
    REQUIRE(j(0, 0) == Approx(pi / 2 - law * (pi / 2 + 9 * a * a * pi / 8)).margin(1e-12));
  }
  SECTION("lambda derivative") {
    const Eigen::VectorXd dl = sys.dresidual_dlambda(law, unit_mode(d, 0, a));
    REQUIRE(dl[0] == Approx(-(a * pi / 2 + 3 * a * a * a * pi / 8)).margin(1e-12));
  }
  SECTION("bifurcation point on the trivial line") {
    ResidualSystem pert(d, NonlinearityKind::multiplicative(), 0.02);
    const double lam = 1.0 + 8.0 * 0.02;
    REQUIRE(pert.residual(lam, unit_mode(d, 0, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("jacobian matches central differences of the residual") {
  std::mt19937_64 rng(17);
  // eps2 well above the probed amplitudes: the h^2 truncation of the FD
  // oracle scales like 1/eps2^2 and must stay below the 1e-6 gate
  for (int dim : {1, 2}) {
    const DomainSpec d = DomainSpec::box(dim, dim == 1 ? 12 : 5);
    const Eigen::VectorXd xd = gram_x(d).diag;
    for (const NonlinearityKind& kind :
         {NonlinearityKind::multiplicative(), NonlinearityKind::additive_regularized(5e-2)}) {
      ResidualSystem sys(d, kind, 1e-3);
      std::uniform_int_distribution<int> pick(0, d.basis_size() - 1);
      for (int t = 0; t < 10; ++t) {
        const Eigen::VectorXd c = testsup::random_x_vector(rng, xd, 0.1);
        const double lambda = 0.9;
        const Eigen::MatrixXd J = sys.jacobian(lambda, c);
        for (int rep = 0; rep < 3; ++rep) {
          const int k = pick(rng);
          const double h = 1e-5;
          Eigen::VectorXd cp = c, cm = c;
          cp[k] += h;
          cm[k] -= h;
          const Eigen::VectorXd fd = (sys.residual(lambda, cp) - sys.residual(lambda, cm)) / (2 * h);
          const double scale = std::max(J.col(k).cwiseAbs().maxCoeff(), 1e-12);
          REQUIRE((fd - J.col(k)).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("lambda derivative matches finite differences") {
  std::mt19937_64 rng(3);
  const DomainSpec d = DomainSpec::box(1, 10);
  const Eigen::VectorXd xd = gram_x(d).diag;
  for (const NonlinearityKind& kind :
       {NonlinearityKind::multiplicative(), NonlinearityKind::additive_regularized(1e-3)}) {
    ResidualSystem sys(d, kind, 1e-2);
    const Eigen::VectorXd c = testsup::random_x_vector(rng, xd, 0.2);
    // the residual is affine in lambda, so a wide step has zero truncation
    // and drowns the cancellation noise of the lambda-independent terms
    const double h = 1e-3, lambda = 1.1;
    const Eigen::VectorXd fd = (sys.residual(lambda + h, c) - sys.residual(lambda - h, c)) / (2 * h);
    REQUIRE((fd - sys.dresidual_dlambda(lambda, c)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("homogeneity of the multiplicative term is exact with degree 2*dim+1") {
  std::mt19937_64 rng(23);
  for (int dim : {1, 2}) {
    const DomainSpec d = DomainSpec::box(dim, dim == 1 ? 10 : 4);
    ResidualSystem sys(d, NonlinearityKind::multiplicative(), 0.0);
    const Eigen::VectorXd c = testsup::random_x_vector(rng, gram_x(d).diag, 0.8);
    const Eigen::VectorXd n1 = sys.nonlinear_term(c);
    const Eigen::VectorXd n2 = sys.nonlinear_term((2.0 * c).eval());
    const double degree = std::pow(2.0, 2 * dim + 1);
    REQUIRE((n2 - degree * n1).cwiseAbs().maxCoeff() <= 1e-13 * n2.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("odd equivariance of the multiplicative residual") {
  std::mt19937_64 rng(29);
  const DomainSpec d = DomainSpec::box(2, 4);
  ResidualSystem sys(d, NonlinearityKind::multiplicative(), 1e-2);
  const Eigen::VectorXd c = testsup::random_x_vector(rng, gram_x(d).diag, 0.4);
  const Eigen::VectorXd rp = sys.residual(0.8, c);
  const Eigen::VectorXd rm = sys.residual(0.8, (-c).eval());
  REQUIRE((rp + rm).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, rp.cwiseAbs().maxCoeff()));
}

TEST_CASE("newton correction") {
  const DomainSpec d = DomainSpec::box(1, 1);
  ResidualSystem sys(d, NonlinearityKind::multiplicative(), 0.0);
  const double a = 0.1;
  const double law = 1.0 / (1.0 + 0.75 * a * a);

  SECTION("an exact solution is returned unchanged without iterating") {
    const NewtonResult r = sys.newton_correct(law, unit_mode(d, 0, a), 1e-12, 20);
    REQUIRE(r.status == NewtonResult::Status::converged);
    REQUIRE(r.iterations == 0);
    REQUIRE(std::abs(r.c[0] - a) == 0.0);
  }
  SECTION("a perturbed one-mode guess converges back to the branch value") {
    const NewtonResult r = sys.newton_correct(law, unit_mode(d, 0, a + 1e-3), 1e-13, 30);
    REQUIRE(r.status == NewtonResult::Status::converged);
    REQUIRE(r.c[0] == Approx(a).margin(1e-10));
  }
  SECTION("the trivial solution at the bifurcation point reports a singular jacobian") {
    ResidualSystem pert(d, NonlinearityKind::multiplicative(), 0.05);
    const NewtonResult r =
        pert.newton_correct(1.0 + 8.0 * 0.05, unit_mode(d, 0, 0.0), 1e-12, 20);
    REQUIRE(r.status == NewtonResult::Status::singular_jacobian);
  }
}

TEST_CASE("smallness ratios decay with the expected order") {
  std::mt19937_64 rng(31);
  SECTION("dim 1 multiplicative: cubic term, ratio slope 2") {
    const DomainSpec d = DomainSpec::box(1, 8);
    ResidualSystem sys(d, NonlinearityKind::multiplicative(), 0.0);
    const Eigen::VectorXd c = testsup::random_x_vector(rng, gram_x(d).diag, 1.0);
    const double h1 = sys.smallness_ratio((0.1 * c).eval());
    const double h2 = sys.smallness_ratio((0.01 * c).eval());
    const double h3 = sys.smallness_ratio((0.001 * c).eval());
    REQUIRE(h1 > h2);
    REQUIRE(h2 > h3);
    const double slope = (std::log(h1) - std::log(h3)) / (std::log(0.1) - std::log(0.001));
    REQUIRE(slope == Approx(2.0).margin(0.05));
    REQUIRE(sys.observed_decay_order(c) == Approx(2.0).margin(0.05));
  }
  SECTION("dim 2 multiplicative: quintic term, ratio slope 4") {
    const DomainSpec d = DomainSpec::box(2, 4);
    ResidualSystem sys(d, NonlinearityKind::multiplicative(), 0.0);
    const Eigen::VectorXd c = testsup::random_x_vector(rng, gram_x(d).diag, 1.0);
    REQUIRE(sys.observed_decay_order(c) == Approx(4.0).margin(0.05));
  }
}

TEST_CASE("additive kind requires a positive regularizer") {
  REQUIRE_THROWS_AS(NonlinearityKind::additive_regularized(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(NonlinearityKind::additive_regularized(-1e-3), std::invalid_argument);
}

TEST_CASE("plugin nonlinearity") {
  const DomainSpec d = DomainSpec::box(1, 6);

  SECTION("a plug-in reproducing the built-in cubic matches it at lambda = 1") {
    auto p = std::make_shared<PluginNonlinearity>();
    p->value = [](const auto&, double u, const auto&, const auto& h) { return h[0] * h[0] * u; };
    p->derivative = [](const auto&, double u, const auto&, const auto& h, double du, const auto&,
                       const auto& dh) { return 2.0 * h[0] * dh[0] * u + h[0] * h[0] * du; };
    ResidualSystem plug(d, NonlinearityKind::make_plugin(p), 1e-2);
    ResidualSystem mult(d, NonlinearityKind::multiplicative(), 1e-2);

    std::mt19937_64 rng(7);
    const Eigen::VectorXd c = testsup::random_x_vector(rng, gram_x(d).diag, 0.2);
    REQUIRE((plug.residual(1.0, c) - mult.residual(1.0, c)).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((plug.jacobian(1.0, c) - mult.jacobian(1.0, c)).cwiseAbs().maxCoeff() < 1e-12);

    // the scaling probe sees the cubic decay and tracing proceeds
    REQUIRE(plug.observed_decay_order(c) == Approx(2.0).margin(0.05));
  }

  SECTION("a linear plug-in fails the smallness probe and refuses continuation") {
    auto p = std::make_shared<PluginNonlinearity>();
    p->value = [](const auto&, double u, const auto&, const auto&) { return 0.5 * u; };
    p->derivative = [](const auto&, double, const auto&, const auto&, double du, const auto&,
                       const auto&) { return 0.5 * du; };
    ResidualSystem plug(d, NonlinearityKind::make_plugin(p), 1e-2);
    ContinuationParams prm;
    prm.ds = 1e-2;
    prm.radius = 0.3;
    prm.max_steps = 10;
    const Branch br = trace_branch(plug, +1, prm);
    REQUIRE(br.termination == Termination::smallness_refused);
  }
}
