#include <doctest.h>

#include <cmath>

#include "entshape/channels.hpp"
#include "entshape/entanglement.hpp"
#include "entshape/errors.hpp"
#include "oracles.hpp"

using namespace entshape;
using namespace entshape::entanglement;
using qstate::Bell;
using qstate::BellDiagonalState;

TEST_CASE("pure-state E_R is the entanglement entropy") {
  CHECK(er_pure(qstate::bell_vector(Bell::PsiPlus)).value == doctest::Approx(1.0));
  oracle::Gen g(7);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXcd psi = g.ginibre(4, 1).col(0);
    psi.normalize();
    const oracle::CMat rho = psi * psi.adjoint();
    const double expect = oracle::entropy_bits(oracle::partial_trace_pair(rho, 0));
    CHECK(er_pure(psi).value == doctest::Approx(expect).epsilon(1e-10));
  }
  qstate::StateVector product = qstate::StateVector::Zero(4);
  product(0) = 1.0;
  CHECK(er_pure(product).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(er_pure(qstate::StateVector::Ones(4)), InvalidArgument);
}

TEST_CASE("Bell-diagonal closed form") {
  CHECK(er_bell_diagonal(BellDiagonalState({1, 0, 0, 0})).value == doctest::Approx(1.0));
  CHECK(er_bell_diagonal(BellDiagonalState({0.5, 0.5, 0, 0})).value == 0.0);
  CHECK(er_bell_diagonal(BellDiagonalState({0.25, 0.25, 0.25, 0.25})).value == 0.0);
  CHECK(er_bell_diagonal(BellDiagonalState({0.1, 0.8, 0.05, 0.05})).value ==
        doctest::Approx(1.0 - oracle::h2(0.8)));
}

TEST_CASE("Werner bridges") {
  CHECK(er_werner(0.83, WernerBridge::Paper) == doctest::Approx(1.0 - oracle::h2(0.915)));
  CHECK(er_werner(0.83, WernerBridge::Paper) == doctest::Approx(0.58044).epsilon(1e-4));
  CHECK(werner_lambda(0.8, WernerBridge::Oracle) == doctest::Approx(0.85));
  CHECK(werner_lambda(0.8, WernerBridge::Paper) == doctest::Approx(0.9));
  // The oracle bridge is exactly the Bell-diagonal closed form of the paper-convention state.
  for (double f : {0.2, 0.4, 0.6, 0.8, 1.0})
    CHECK(er_werner(f, WernerBridge::Oracle) == doctest::Approx(er_bell_diagonal(qstate::werner_paper(f)).value));
  CHECK(er_werner(1.0 / 3.0, WernerBridge::Oracle) == 0.0);
}

TEST_CASE("numeric E_R matches closed forms") {
  RelativeEntropySolver solver;
  for (double f : {0.4, 0.6, 0.8, 0.95}) {
    const auto s = qstate::werner_paper(f);
    const auto r = solver.minimize(s.to_density());
    CHECK(r.kind == ERKind::NumericUpperBound);
    CHECK(r.value == doctest::Approx(er_bell_diagonal(s).value).epsilon(1e-3));
    CHECK(r.value >= er_bell_diagonal(s).value - 1e-9);
  }
  const auto bell = solver.minimize(qstate::bell_state(Bell::PsiPlus));
  CHECK(bell.value == doctest::Approx(1.0).epsilon(5e-3));
  const auto prod = solver.minimize(qstate::DensityMatrix::basis_state(1, {2, 2}));
  CHECK(prod.value < 1e-6);
}

TEST_CASE("numeric certificate is separable and reproduces the value") {
  oracle::Gen g(31);
  for (int i = 0; i < 4; ++i) {
    const qstate::DensityMatrix rho(g.entangled_pair(0.5), {2, 2});
    const auto r = er_numeric(rho);
    REQUIRE(r.certificate);
    const auto sigma = r.certificate->assemble();
    CHECK(is_ppt(sigma));
    CHECK(r.value == doctest::Approx(oracle::relative_entropy_bits(rho.matrix(), sigma.matrix())).epsilon(1e-8));
    CHECK(r.duality_gap >= 0.0);
  }
}

TEST_CASE("amplitude damping output") {
  const auto rho = channels::apply(channels::amplitude_damping(0.3), qstate::bell_state(Bell::PsiPlus), 1);
  const auto r = er_numeric(rho);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.4984).epsilon(1e-3));
  // Bounded below by the twirled state, which is an LOCC image.
  CHECK(r.value >= er_bell_diagonal(BellDiagonalState::project(rho)).value - 1e-6);
}

TEST_CASE("negativity and PPT") {
  CHECK(negativity(qstate::bell_state(Bell::PsiMinus)) == doctest::Approx(0.5));
  CHECK(negativity(qstate::DensityMatrix::maximally_mixed({2, 2})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(is_ppt(qstate::werner_paper(0.34).to_density()));
  CHECK(is_ppt(qstate::werner_paper(0.33).to_density()));
}

TEST_CASE("separable start is a valid ansatz") {
  SolverSettings s;
  const auto start = bell_separable_start(qstate::werner_paper(0.9).to_density(), s);
  const auto sigma = start.assemble();
  CHECK(std::abs(sigma.matrix().trace() - 1.0) < 1e-12);
  CHECK(is_ppt(sigma));
  CHECK(BellDiagonalState::project(sigma).max_coefficient() <= 0.5 + 1e-9);
}
