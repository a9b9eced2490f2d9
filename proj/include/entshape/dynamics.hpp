#pragma once

// Continuous-time fidelity decay under the depolarizing generator and the
// entropy-production bookkeeping built on it.

#include <cstddef>
#include <vector>

#include "entshape/entanglement.hpp"

namespace entshape::dynamics {

// Closed form used along trajectories.
enum class ERPath {
  Paper,   // 1 - H2((1+F)/2), set to 0 for F <= 1/2
  Oracle,  // exact E_R of F|psi+><psi+| + (1-F) I/4
};

// F(t) = F0 exp(-p t).
double fidelity_decay(double f0, double p, double t);

double er_of_fidelity(double f, ERPath path = ERPath::Paper);

// dE_R/dt = -(p F / 2) log2((1+F)/(1-F)), for F in (0,1).
double er_production_rate(double f, double p);

struct DeltaER {
  double value;       // E_R(F0 e^{-p' T}) - E_R(F0 e^{-p T}); > 0 when shaping retains more
  double quadrature;  // integral over [0,T] of the rate difference
  bool hypothesis_ok; // p' < p
  bool crosses_clamp; // a trajectory reaches F <= 1/2, where the clamp breaks the integral identity
};

DeltaER delta_er(double p, double p_prime, double f0, double t_final, ERPath path = ERPath::Paper);

// Integral of er_production_rate along one trajectory, [0, T]; handles the
// logarithmic endpoint singularity at F0 = 1 with a graded Gauss-Legendre mesh.
double integrate_rate(double p, double f0, double t_final);

struct TrajectorySample {
  double t;
  double fidelity;
  double er_bits;
  double mixedness;  // linear entropy of F|psi+><psi+| + (1-F) I/4
};

struct TrajectoryParams {
  double p;
  double p_prime;
  double f0;
  double t_final;
  double step;
};

struct EntropyTrajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryParams params;
  double rate;  // decay rate this trajectory follows (p or p')
};

struct TrajectoryPair {
  EntropyTrajectory post;
  EntropyTrajectory pes;
};

// Uniform grid t = 0, step, 2 step, ... and always the endpoint T.
TrajectoryPair trajectory(double p, double p_prime, double f0, double t_final, double step,
                          ERPath path = ERPath::Paper);

// ---- amplitude damping, time sliced -------------------------------------------

struct DampingEvolution {
  double gamma;
  std::size_t slices;
  double er;         // E_R upper bound of (I (x) A_gamma)(psi+)
  double er_double;  // same with 2 * slices
  bool converged;
};

// Evolve psi+ through `slices` applications of A_{g} with
// g = 1 - (1 - gamma)^(1/slices), then bound E_R numerically.
DampingEvolution evolve_amplitude_damping(double gamma, std::size_t slices,
                                          const entanglement::SolverSettings& solver = {});

struct DampingDelta {
  double gamma;
  double gamma_prime;
  double value;  // E_R(gamma') - E_R(gamma)
  DampingEvolution post;
  DampingEvolution pes;
};

DampingDelta delta_er_amplitude_damping(double gamma, double gamma_prime, std::size_t slices = 256,
                                        const entanglement::SolverSettings& solver = {});

}  // namespace entshape::dynamics
