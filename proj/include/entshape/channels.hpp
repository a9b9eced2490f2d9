#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "entshape/qstate.hpp"

namespace entshape::channels {

using qstate::ComplexMatrix;
using qstate::DensityMatrix;

enum class Family { Depolarizing, AmplitudeDamping, Custom };

// Family metadata. `parameter` is p for depolarizing and the damping
// probability gamma for amplitude damping; unused for Custom.
struct FamilyTag {
  Family family = Family::Custom;
  double parameter = 0.0;
};

inline constexpr double kCompletenessTol = 1e-10;
inline constexpr double kKrausPruneNorm = 1e-12;

class QuantumChannel {
 public:
  // Throws InvalidArgument on an empty set, mismatched shapes, or when
  // sum K^dag K differs from the identity by more than 1e-10.
  explicit QuantumChannel(std::vector<ComplexMatrix> kraus, FamilyTag tag = {});

  const std::vector<ComplexMatrix>& kraus() const noexcept { return kraus_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(kraus_.front().rows()); }
  const FamilyTag& tag() const noexcept { return tag_; }

  // Action on an arbitrary operator of the channel's dimension.
  ComplexMatrix operator()(const ComplexMatrix& x) const;

 private:
  std::vector<ComplexMatrix> kraus_;
  FamilyTag tag_;
};

// Pauli matrices: 0 -> I, 1 -> X, 2 -> Y, 3 -> Z.
ComplexMatrix pauli(std::size_t index);
std::vector<ComplexMatrix> pauli_set();

QuantumChannel identity_channel(std::size_t dim = 2);
QuantumChannel unitary_channel(const ComplexMatrix& u);
QuantumChannel depolarizing(double p);            // p in [0, 3/4]
QuantumChannel amplitude_damping(double gamma);   // gamma in [0, 1]

// second after first; Kraus products below kKrausPruneNorm are dropped.
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

// Apply the channel to one subsystem of a register.
DensityMatrix apply(const QuantumChannel& channel, const DensityMatrix& rho, std::size_t target);

// (I (x) N)(|psi+><psi+|).
DensityMatrix choi(const QuantumChannel& channel);

struct EntanglementBreaking {
  bool breaking;
  double min_pt_eigenvalue;  // witness: smallest eigenvalue of the Choi partial transpose
};
EntanglementBreaking is_entanglement_breaking(const QuantumChannel& channel);

// Smallest parameter in [lo, hi] at which family(parameter) becomes
// entanglement breaking, by bisection on the PPT witness. Requires
// family(lo) non-breaking and family(hi) breaking.
double locate_eb_threshold(const std::function<QuantumChannel(double)>& family, double lo, double hi,
                           double tol = 1e-12);

// Bell-diagonal weights of (I (x) N_p) on |psi+>, from the Kraus action.
qstate::BellDiagonalState werner_from_channel(double p);

// ---- dynamical decoupling ----------------------------------------------------

enum class DDMode { Parametric, PulseAverage };

struct DDConfig {
  DDMode mode = DDMode::Parametric;
  std::size_t pulse_count = 1;          // M
  double pulse_frequency = 1.0;         // f_DD
  double noise_spectral_density = 0.0;  // gamma_sd, same inverse-time units as f_DD
  std::vector<ComplexMatrix> pulse_set = pauli_set();
  // Undo each pulse after the channel (P^dag N(P rho P^dag) P). With false the
  // literal uniform average of N(P rho P^dag) is used.
  bool frame_corrected = true;

  void validate() const;

  static DDConfig parametric(double pulse_frequency, double noise_spectral_density);
  // gamma_sd / f_DD chosen so that the compression factor equals `factor`.
  static DDConfig parametric_with_factor(double factor);
  static DDConfig pulse_average(std::size_t pulse_count, std::vector<ComplexMatrix> pulses = pauli_set(),
                                bool frame_corrected = true);
};

// exp(-gamma_sd / f_DD).
double compression_factor(const DDConfig& cfg);

// Same family with parameter scaled by compression_factor(cfg).
QuantumChannel dd_effective_parametric(const QuantumChannel& channel, const DDConfig& cfg);

// Uniform average over the M pulses P_k = pulse_set[k mod |pulse_set|].
QuantumChannel dd_effective_pulse_average(const QuantumChannel& channel, const DDConfig& cfg);

}  // namespace entshape::channels
