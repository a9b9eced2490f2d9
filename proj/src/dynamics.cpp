#include "entshape/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "entshape/channels.hpp"
#include "entshape/errors.hpp"

namespace entshape::dynamics {

namespace {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on P_n.
Rule gauss_legendre(int n) {
  Rule r{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = x;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const Rule& rule() {
  static const Rule r = gauss_legendre(12);
  return r;
}

double unclamped_paper_er(double f) { return 1.0 - qstate::binary_entropy(0.5 * (1.0 + f)); }

}  // namespace

double fidelity_decay(double f0, double p, double t) {
  if (!(f0 > 0.0 && f0 <= 1.0)) throw InvalidArgument("fidelity_decay: F0 outside (0, 1]");
  if (!(p >= 0.0)) throw InvalidArgument("fidelity_decay: p must be non-negative");
  if (!(t >= 0.0)) throw InvalidArgument("fidelity_decay: t must be non-negative");
  return f0 * std::exp(-p * t);
}

double er_of_fidelity(double f, ERPath path) {
  if (path == ERPath::Oracle) return entanglement::er_werner(f, entanglement::WernerBridge::Oracle);
  if (f <= 0.5) return 0.0;
  return unclamped_paper_er(f);
}

double er_production_rate(double f, double p) {
  if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("er_production_rate: F must lie in (0, 1)");
  if (!(p >= 0.0)) throw InvalidArgument("er_production_rate: p must be non-negative");
  return -0.5 * p * f * std::log2((1.0 + f) / (1.0 - f));
}

double integrate_rate(double p, double f0, double t_final) {
  if (!(t_final >= 0.0)) throw InvalidArgument("integrate_rate: T must be non-negative");
  if (p == 0.0 || t_final == 0.0) return 0.0;
  const Rule& r = rule();
  auto panel = [&](double a, double b) {
    double s = 0.0;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      s += r.weights[i] * er_production_rate(fidelity_decay(f0, p, mid + half * r.nodes[i]), p);
    return half * s;
  };
  // Dyadic panels towards t = 0 where the rate is logarithmically singular
  // for F0 = 1; the uncovered sliver [0, T 2^-40] contributes below 1e-10.
  double total = 0.0;
  double b = t_final;
  for (int k = 0; k < 40; ++k) {
    const double a = 0.5 * b;
    total += panel(a, b);
    b = a;
  }
  return total;
}

DeltaER delta_er(double p, double p_prime, double f0, double t_final, ERPath path) {
  if (!(t_final > 0.0)) throw InvalidArgument("delta_er: T must be positive");
  if (!(p_prime >= 0.0)) throw InvalidArgument("delta_er: p' must be non-negative");
  const double f_post = fidelity_decay(f0, p, t_final);
  const double f_pes = fidelity_decay(f0, p_prime, t_final);
  DeltaER d{};
  d.value = er_of_fidelity(f_pes, path) - er_of_fidelity(f_post, path);
  d.hypothesis_ok = p_prime < p;
  d.crosses_clamp = path == ERPath::Paper && std::min(f_post, f_pes) <= 0.5;
  d.quadrature = integrate_rate(p_prime, f0, t_final) - integrate_rate(p, f0, t_final);
  return d;
}

TrajectoryPair trajectory(double p, double p_prime, double f0, double t_final, double step, ERPath path) {
  if (!(step > 0.0)) throw InvalidArgument("trajectory: step must be positive");
  if (!(t_final >= 0.0)) throw InvalidArgument("trajectory: T must be non-negative");
  const TrajectoryParams params{p, p_prime, f0, t_final, step};
  auto build = [&](double rate) {
    EntropyTrajectory tr{{}, params, rate};
    auto push = [&](double t) {
      const double f = fidelity_decay(f0, rate, t);
      const auto mixed = qstate::purity_and_mixedness(qstate::werner_paper(f).to_density());
      tr.samples.push_back({t, f, er_of_fidelity(f, path), mixed.linear_entropy});
    };
    const auto n = static_cast<std::size_t>(std::floor(t_final / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) push(static_cast<double>(k) * step);
    if (t_final - static_cast<double>(n) * step > 1e-12) push(t_final);
    return tr;
  };
  return {build(p), build(p_prime)};
}

DampingEvolution evolve_amplitude_damping(double gamma, std::size_t slices, const entanglement::SolverSettings& solver) {
  if (slices < 1) throw InvalidArgument("evolve_amplitude_damping: need at least one slice");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("evolve_amplitude_damping: gamma outside [0, 1]");
  entanglement::RelativeEntropySolver s(solver);
  auto run = [&](std::size_t m) {
    const double g = 1.0 - std::pow(1.0 - gamma, 1.0 / static_cast<double>(m));
    const auto slice = channels::amplitude_damping(g);
    auto rho = qstate::bell_state(qstate::Bell::PsiPlus);
    for (std::size_t k = 0; k < m; ++k) rho = channels::apply(slice, rho, 1);
    return s.minimize(rho);
  };
  const auto a = run(slices);
  const auto b = run(2 * slices);
  return {gamma, slices, a.value, b.value, a.converged && b.converged};
}

DampingDelta delta_er_amplitude_damping(double gamma, double gamma_prime, std::size_t slices,
                                        const entanglement::SolverSettings& solver) {
  const auto post = evolve_amplitude_damping(gamma, slices, solver);
  const auto pes = evolve_amplitude_damping(gamma_prime, slices, solver);
  return {gamma, gamma_prime, pes.er - post.er, post, pes};
}

}  // namespace entshape::dynamics
