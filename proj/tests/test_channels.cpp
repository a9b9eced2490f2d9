#include <doctest.h>

#include <cmath>

#include "entshape/channels.hpp"
#include "entshape/errors.hpp"
#include "oracles.hpp"

using namespace entshape;
using namespace entshape::channels;
using qstate::DensityMatrix;

namespace {

double choi_fidelity(const QuantumChannel& ch) { return qstate::BellDiagonalState::project(choi(ch)).fidelity(); }

}  // namespace

TEST_CASE("Kraus completeness is enforced") {
  ComplexMatrix k = ComplexMatrix::Identity(2, 2) * 0.9;
  CHECK_THROWS_AS(QuantumChannel({k}), InvalidArgument);
  CHECK_THROWS_AS(QuantumChannel({}), InvalidArgument);
  CHECK_NOTHROW(depolarizing(0.75));
  CHECK_THROWS_AS(depolarizing(0.8), InvalidArgument);
  CHECK_THROWS_AS(amplitude_damping(1.1), InvalidArgument);
}

TEST_CASE("depolarizing matches its defining formula") {
  oracle::Gen g(21);
  for (double p : {0.0, 0.1, 0.2, 0.5, 0.75}) {
    const ComplexMatrix r = g.density(4, 3);
    const auto ours = apply(depolarizing(p), DensityMatrix(r, {2, 2}), 1);
    CHECK(qstate::max_abs_diff(ours.matrix(), oracle::depolarize_second(r, p)) < 1e-14);
  }
}

TEST_CASE("depolarized Bell pair has weights (1-p, p/3, p/3, p/3)") {
  const auto w = werner_from_channel(0.2);
  CHECK(w[0] == doctest::Approx(0.8));
  for (std::size_t i = 1; i < 4; ++i) CHECK(w[i] == doctest::Approx(0.2 / 3));
  CHECK(choi_fidelity(depolarizing(0.2)) == doctest::Approx(0.8));
}

TEST_CASE("amplitude damping action") {
  const auto ad = amplitude_damping(0.3);
  const auto one = ad(DensityMatrix::basis_state(1, {2}).matrix());
  CHECK(one(0, 0).real() == doctest::Approx(0.3));
  CHECK(one(1, 1).real() == doctest::Approx(0.7));
  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  CHECK(std::abs(ad(plus)(0, 1)) == doctest::Approx(0.5 * std::sqrt(0.7)));
  CHECK(ad.tag().family == Family::AmplitudeDamping);
}

TEST_CASE("composition of damping channels multiplies survival") {
  const auto c = compose(amplitude_damping(0.2), amplitude_damping(0.5));
  CHECK(c.tag().family == Family::AmplitudeDamping);
  CHECK(c.tag().parameter == doctest::Approx(1 - 0.8 * 0.5));
  const auto direct = amplitude_damping(0.6);
  const ComplexMatrix x = DensityMatrix::basis_state(1, {2}).matrix();
  CHECK(qstate::max_abs_diff(c(x), direct(x)) < 1e-14);
}

TEST_CASE("trace preservation over random channels") {
  oracle::Gen g(99);
  for (int i = 0; i < 100; ++i) {
    const QuantumChannel ch(g.kraus(2, 1 + i % 4));
    const ComplexMatrix r = g.density(4, 1 + i % 4);
    const auto out = apply(ch, DensityMatrix(r, {2, 2}), static_cast<std::size_t>(i % 2));
    CHECK(std::abs(out.matrix().trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("entanglement-breaking threshold of depolarizing is 1/2") {
  CHECK_FALSE(is_entanglement_breaking(depolarizing(0.49)).breaking);
  CHECK(is_entanglement_breaking(depolarizing(0.51)).breaking);
  const double t = locate_eb_threshold([](double p) { return depolarizing(p); }, 0.0, 0.75);
  CHECK(t == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(is_entanglement_breaking(amplitude_damping(1.0)).breaking);
  CHECK_FALSE(is_entanglement_breaking(amplitude_damping(0.99)).breaking);
}

TEST_CASE("parametric decoupling scales the family parameter") {
  const auto dd = DDConfig::parametric(2.0, std::log(1 / 0.85) * 2.0);
  CHECK(compression_factor(dd) == doctest::Approx(0.85));
  const auto eff = dd_effective_parametric(depolarizing(0.2), dd);
  CHECK(eff.tag().parameter == doctest::Approx(0.17));
  CHECK(choi_fidelity(eff) == doctest::Approx(0.83));
  // Infinite frequency leaves the channel untouched.
  const auto fast = dd_effective_parametric(depolarizing(0.2), DDConfig::parametric(1e15, 1.0));
  CHECK(fast.tag().parameter == doctest::Approx(0.2));
  CHECK_THROWS_AS(dd_effective_parametric(QuantumChannel({ComplexMatrix::Identity(2, 2)}), dd), InvalidArgument);
}

TEST_CASE("pulse average equals an explicit twirl") {
  oracle::Gen g(4);
  const auto base = amplitude_damping(0.4);
  const ComplexMatrix r = g.density(2, 2);
  for (std::size_t m : {1u, 2u, 3u, 4u, 7u}) {
    const auto eff = dd_effective_pulse_average(base, DDConfig::pulse_average(m));
    ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
    for (std::size_t k = 0; k < m; ++k) {
      const auto p = oracle::pauli(static_cast<int>(k % 4));
      expect += p.adjoint() * base(p * r * p.adjoint()) * p / static_cast<double>(m);
    }
    CHECK(qstate::max_abs_diff(eff(r), expect) < 1e-14);

    const auto literal = dd_effective_pulse_average(base, DDConfig::pulse_average(m, pauli_set(), false));
    ComplexMatrix lit = ComplexMatrix::Zero(2, 2);
    for (std::size_t k = 0; k < m; ++k) {
      const auto p = oracle::pauli(static_cast<int>(k % 4));
      lit += base(p * r * p.adjoint()) / static_cast<double>(m);
    }
    CHECK(qstate::max_abs_diff(literal(r), lit) < 1e-14);
  }
}

TEST_CASE("pulse averaging cannot compress a depolarizing channel") {
  const auto dep = depolarizing(0.2);
  const auto twirled = dd_effective_pulse_average(dep, DDConfig::pulse_average(100));
  CHECK(choi_fidelity(twirled) == doctest::Approx(0.8));
  // The literal Pauli average is the constant map to I/2.
  const auto literal = dd_effective_pulse_average(dep, DDConfig::pulse_average(4, pauli_set(), false));
  CHECK(qstate::max_abs_diff(literal(DensityMatrix::basis_state(0, {2}).matrix()),
                             ComplexMatrix::Identity(2, 2) / 2.0) < 1e-14);
  CHECK(is_entanglement_breaking(literal).breaking);
}

TEST_CASE("decoupling config validation") {
  CHECK_THROWS_AS(DDConfig::parametric(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(DDConfig::parametric(1.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(DDConfig::pulse_average(0), InvalidArgument);
  CHECK_THROWS_AS(DDConfig::parametric_with_factor(1.2), InvalidArgument);
  DDConfig cfg;
  cfg.pulse_frequency = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
