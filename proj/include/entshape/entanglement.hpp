#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "entshape/qstate.hpp"

namespace entshape::entanglement {

using qstate::BellDiagonalState;
using qstate::DensityMatrix;
using qstate::StateVector;

// Bloch angles of one qubit: cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct QubitAngles {
  double theta = 0.0;
  double phi = 0.0;
};

struct ProductState {
  QubitAngles a;
  QubitAngles b;
};

// sigma = (1 - floor) * sum_k w_k |a_k b_k><a_k b_k| + floor * I/4.
// Separable by construction; the floor keeps sigma full rank.
class SeparableAnsatz {
 public:
  SeparableAnsatz(std::vector<double> weights, std::vector<ProductState> product_states, double floor);

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<ProductState>& product_states() const noexcept { return states_; }
  double floor() const noexcept { return floor_; }
  std::size_t size() const noexcept { return weights_.size(); }

  DensityMatrix assemble() const;

 private:
  std::vector<double> weights_;
  std::vector<ProductState> states_;
  double floor_;
};

enum class ERKind { ClosedForm, NumericUpperBound };

struct ERResult {
  double value = 0.0;  // bits
  ERKind kind = ERKind::ClosedForm;
  std::optional<SeparableAnsatz> certificate;
  std::size_t iterations = 0;
  bool converged = true;
  // Frank-Wolfe gap at the returned point (bits): value - E_R <= gap, up to
  // the floor. Zero for closed forms.
  double duality_gap = 0.0;
};

// S(rho_A) for a normalised bipartite pure state.
ERResult er_pure(const StateVector& psi, std::size_t dim_a = 2, std::size_t dim_b = 2);

// 0 when the largest Bell weight lambda <= 1/2, else 1 - H2(lambda).
ERResult er_bell_diagonal(const BellDiagonalState& state);

// Two readings of the Werner closed form for rho_W(F) = F|psi+><psi+| + (1-F)I/4.
enum class WernerBridge {
  Paper,   // 1 - H2((1+F)/2)
  Oracle,  // 1 - H2(lambda) with lambda = (1+3F)/4, the exact value for rho_W(F)
};
double er_werner(double f, WernerBridge bridge);
// Largest Bell weight each bridge assigns to Werner parameter F.
double werner_lambda(double f, WernerBridge bridge);

struct SolverSettings {
  std::size_t ansatz_size = 16;
  double init_mixing = 1e-3;  // epsilon in sigma_0 = (1-eps) proj + eps I/4
  double floor = 1e-9;
  double stall_tolerance = 1e-7;  // bits
  std::size_t stall_window = 25;
  std::size_t max_iterations = 5000;
  std::uint64_t seed = 0x5eed'e17a'0000'0001ULL;
};

// Alternating minimisation of S(rho||sigma) over the separable ansatz:
// multiplicative (EM) weight updates, Frank-Wolfe atom insertion and local
// refinement of the product states. Instances keep private scratch state and
// are not re-entrant; use one per thread.
class RelativeEntropySolver {
 public:
  explicit RelativeEntropySolver(SolverSettings settings = {});

  ERResult minimize(const DensityMatrix& rho);

  const SolverSettings& settings() const noexcept { return settings_; }

 private:
  SolverSettings settings_;
  std::mt19937_64 rng_;
};

ERResult er_numeric(const DensityMatrix& rho, const SolverSettings& settings = {});

// Initial separable guess: projection of the Bell weights onto the separable
// octahedron, decomposed into 12 product states, mixed with I/4.
SeparableAnsatz bell_separable_start(const DensityMatrix& rho, const SolverSettings& settings);

double negativity(const DensityMatrix& rho);
bool is_ppt(const DensityMatrix& rho, double tolerance = 1e-12);

}  // namespace entshape::entanglement
