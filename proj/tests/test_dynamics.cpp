#include <doctest.h>

#include <cmath>

#include "entshape/channels.hpp"
#include "entshape/dynamics.hpp"
#include "entshape/errors.hpp"
#include "oracles.hpp"

using namespace entshape;
using namespace entshape::dynamics;

TEST_CASE("fidelity decay matches RK4") {
  CHECK(fidelity_decay(1.0, 0.0, 3.0) == 1.0);
  CHECK(fidelity_decay(1.0, 0.2, 0.0) == 1.0);
  CHECK(fidelity_decay(1.0, 0.2, 1.0) == doctest::Approx(0.8187).epsilon(1e-4));
  for (double p : {0.05, 0.2, 0.7})
    for (double t : {0.5, 1.0, 3.0})
      CHECK(std::abs(fidelity_decay(0.9, p, t) - oracle::rk4_fidelity(0.9, p, t, 200)) < 1e-8);
  CHECK_THROWS_AS(fidelity_decay(1.2, 0.1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(fidelity_decay(0.0, 0.1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(fidelity_decay(0.5, -0.1, 1.0), InvalidArgument);
}

TEST_CASE("production rate") {
  CHECK(er_production_rate(0.8, 0.0) == 0.0);
  CHECK(er_production_rate(0.8, 0.2) == doctest::Approx(-0.08 * std::log2(9.0)));
  CHECK(er_production_rate(0.8, 0.2) == doctest::Approx(-0.2536).epsilon(1e-4 / 0.2536));
  CHECK_THROWS_AS(er_production_rate(1.0, 0.2), InvalidArgument);
  CHECK_THROWS_AS(er_production_rate(0.0, 0.2), InvalidArgument);
}

TEST_CASE("production rate matches central differences") {
  const double h = 1e-5;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double f = 0.55 + 0.04 * i, p = 0.05 + 0.05 * j;
      // E_R along F(t) on both sides of the point where F(t) = f.
      const double fd = ((1 - oracle::h2(0.5 * (1 + f * std::exp(-p * h)))) -
                         (1 - oracle::h2(0.5 * (1 + f * std::exp(p * h))))) /
                        (2 * h);
      CHECK(std::abs(fd - er_production_rate(f, p)) <= 1e-6 * std::abs(fd));
    }
}

TEST_CASE("weaker noise produces entropy more slowly") {
  for (double f = 0.1; f < 1.0; f += 0.1)
    for (double p = 0.1; p <= 0.5; p += 0.1)
      for (double q = 0.0; q < p - 1e-12; q += 0.05)
        CHECK(std::abs(er_production_rate(f, q)) < std::abs(er_production_rate(f, p)));
}

TEST_CASE("closed-form E_R along trajectories") {
  CHECK(er_of_fidelity(0.5) == 0.0);
  CHECK(er_of_fidelity(0.3) == 0.0);
  CHECK(er_of_fidelity(0.83) == doctest::Approx(1 - oracle::h2(0.915)));
  CHECK(er_of_fidelity(0.8, ERPath::Oracle) == doctest::Approx(1 - oracle::h2(0.85)));
}

TEST_CASE("suppression is positive below the hypothesis boundary") {
  for (double T : {0.5, 1.0, 2.0})
    for (double p = 0.05; p <= 0.5 + 1e-12; p += 0.05)
      for (double q = 0.0; q < p - 1e-12; q += 0.05) {
        if (std::exp(-p * T) <= 0.5) continue;
        const auto d = delta_er(p, q, 1.0, T);
        CHECK(d.value > 0.0);
        CHECK(d.hypothesis_ok);
        CHECK_FALSE(d.crosses_clamp);
      }
  CHECK(delta_er(0.2, 0.2, 1.0, 1.0).value == 0.0);
  CHECK_FALSE(delta_er(0.2, 0.2, 1.0, 1.0).hypothesis_ok);
  CHECK_FALSE(delta_er(0.2, 0.3, 1.0, 1.0).hypothesis_ok);
  CHECK(delta_er(0.2, 0.17, 1.0, 1.0).value > 0.0);
}

TEST_CASE("suppression quadrature agrees with the closed form") {
  for (double f0 : {1.0, 0.95, 0.8})
    for (double T : {0.5, 1.0, 2.0}) {
      const auto d = delta_er(0.3, 0.1, f0, T);
      if (d.crosses_clamp) continue;
      CHECK(std::abs(d.value - d.quadrature) < 1e-6);
    }
  // Away from F = 1 the integrand is smooth; Simpson as a second opinion.
  const double simpson = oracle::simpson(
      [](double t) { return er_production_rate(0.9 * std::exp(-0.25 * t), 0.25); }, 0.0, 1.5, 2000);
  CHECK(integrate_rate(0.25, 0.9, 1.5) == doctest::Approx(simpson).epsilon(1e-10));
}

TEST_CASE("trajectory invariants") {
  const auto tr = trajectory(0.2, 0.17, 1.0, 1.03, 0.1);
  for (const auto* t : {&tr.post, &tr.pes}) {
    REQUIRE(t->samples.size() == 12);
    CHECK(t->samples.front().t == 0.0);
    CHECK(t->samples.front().fidelity == 1.0);
    CHECK(t->samples.back().t == doctest::Approx(1.03));
    for (std::size_t i = 1; i < t->samples.size(); ++i) {
      CHECK(t->samples[i].t > t->samples[i - 1].t);
      CHECK(t->samples[i].fidelity <= t->samples[i - 1].fidelity);
    }
    for (const auto& s : t->samples) {
      CHECK(std::abs(s.er_bits - (1 - oracle::h2(0.5 * (1 + s.fidelity)))) < 1e-12);
      const double purity = s.fidelity * s.fidelity + (1 - s.fidelity * s.fidelity) / 4;
      CHECK(s.mixedness == doctest::Approx(4.0 / 3.0 * (1 - purity)).epsilon(1e-12));
    }
  }
  for (std::size_t i = 0; i < tr.post.samples.size(); ++i) {
    CHECK(tr.pes.samples[i].fidelity >= tr.post.samples[i].fidelity);
    CHECK(tr.pes.samples[i].er_bits >= tr.post.samples[i].er_bits);
  }
  CHECK(tr.post.samples.back().mixedness > tr.pes.samples.back().mixedness);
  CHECK_THROWS_AS(trajectory(0.2, 0.1, 1.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("clamp keeps long trajectories defined") {
  const auto tr = trajectory(0.5, 0.1, 1.0, 4.0, 0.5);
  CHECK(tr.post.samples.back().er_bits == 0.0);
  CHECK(delta_er(0.5, 0.1, 1.0, 4.0).crosses_clamp);
}

TEST_CASE("time-sliced amplitude damping equals the single channel") {
  entanglement::SolverSettings s;
  const auto ev = evolve_amplitude_damping(0.3, 16, s);
  const auto direct =
      entanglement::er_numeric(channels::apply(channels::amplitude_damping(0.3),
                                               qstate::bell_state(qstate::Bell::PsiPlus), 1), s);
  CHECK(ev.er == doctest::Approx(direct.value).epsilon(1e-6));
  CHECK(ev.er_double == doctest::Approx(ev.er).epsilon(1e-6));
  CHECK(ev.slices == 16);
  const auto d = delta_er_amplitude_damping(0.5, 0.425, 8, s);
  CHECK(d.value > 0.0);
  CHECK(d.value == doctest::Approx(d.pes.er - d.post.er));
}
