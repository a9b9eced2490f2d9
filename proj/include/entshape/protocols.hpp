#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "entshape/channels.hpp"
#include "entshape/entanglement.hpp"
#include "entshape/qstate.hpp"

namespace entshape::protocols {

using channels::DDConfig;
using channels::QuantumChannel;
using entanglement::ERResult;
using qstate::BellDiagonalState;
using qstate::ComplexMatrix;
using qstate::DensityMatrix;

// ---- post-channel distillation (DEJMPS) ------------------------------------

struct Branch {
  double probability;
  bool success;
  BellDiagonalState state;
};

// Outcome of one distillation block: 2^rounds input pairs reduced to one
// output pair. Branches with equal success flag are merged (the recurrence
// is bilinear, so merging before the next round is exact); `rounds` keeps the
// per-round record.
struct DistillationOutcome {
  std::vector<Branch> branches;
  double success_probability = 1.0;
  DensityMatrix global_state;
  std::optional<BellDiagonalState> selected_state;
  std::size_t pairs_per_block = 1;
  std::size_t blocks = 1;

  struct Round {
    double success_probability;  // cumulative: all measurements so far matched
    std::optional<BellDiagonalState> success_state;
    std::optional<BellDiagonalState> failure_state;
  };
  std::vector<Round> rounds;

  BellDiagonalState global_bell() const { return BellDiagonalState::project(global_state); }
  // Failure-branch mixture, if any failure has non-zero probability.
  std::optional<BellDiagonalState> trash_state() const;
};

// (I (x) X) . CNOT . (H (x) I), control on the first qubit.
ComplexMatrix u_pre();

// One DEJMPS step by explicit 16x16 simulation: x-rotations (+pi/2 on Alice,
// -pi/2 on Bob), bilateral CNOT pair1 -> pair2, Z measurement of pair2, keep
// pair1 on equal outcomes. Qubit order A1 B1 A2 B2.
DistillationOutcome dejmps_branch_map(const BellDiagonalState& pair1, const BellDiagonalState& pair2);

// Recursive DEJMPS over n_pairs identical inputs. Every round is applied
// unconditionally; a block succeeds when all of its measurements matched.
DistillationOutcome dejmps_recursive(std::size_t n_pairs, const BellDiagonalState& input, std::size_t rounds);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;     // sample standard deviation
  double standard_error = 0.0;  // std / sqrt(samples)
  std::size_t samples = 0;
};

struct MonteCarloStats {
  std::size_t runs = 0;
  std::uint64_t master_seed = 0;
  MeanStd success_probability;   // per-block success indicator
  MeanStd selected_fidelity;     // fidelity of successful blocks
  MeanStd global_fidelity;       // fidelity of every block's output
  MeanStd global_er;             // E_R of the sampled mixture, batch means
  MeanStd selected_er;           // E_R of the successful-block mixture, batch means
  BellDiagonalState global_mixture{{1.0, 0.0, 0.0, 0.0}};
  std::optional<BellDiagonalState> selected_mixture;
};

inline constexpr std::size_t kMonteCarloBatches = 20;

// Samples measurement outcomes run by run. Run i uses rng::run_seed(seed, i);
// per-run records are reduced in run order, so any worker count yields
// bit-identical statistics. workers = 0 means hardware concurrency.
MonteCarloStats dejmps_monte_carlo(std::size_t n_pairs, const BellDiagonalState& input, std::size_t rounds,
                                   std::size_t run_count, std::uint64_t master_seed, std::size_t workers = 1);

// ---- pre-channel entanglement shaping ---------------------------------------

struct PESOutcome {
  DensityMatrix output_state;  // one pair, or the A1 A2 B1 B2 block when U_pre is used
  QuantumChannel effective_channel;
  ERResult per_pair_er;
  std::size_t n_pairs;
  bool bell_diagonal;
  double fidelity;  // <psi+| pair |psi+>
};

QuantumChannel dd_effective(const QuantumChannel& channel, const DDConfig& cfg);

// |psi+>^n, optional U_pre on the transmitted halves of each pair block,
// each transmitted half sent through the DD-effective channel. Output is the
// deterministic product of identical blocks.
PESOutcome pes_pipeline(std::size_t n_pairs, const QuantumChannel& channel, const DDConfig& dd, bool use_u_pre,
                        const entanglement::SolverSettings& solver = {});

struct PesCalibration {
  double p;
  double p_prime;
  double compression_factor;  // p'/p
  double log_ratio;           // gamma_sd / f_DD = ln(p/p'); negative when p' > p
  bool realisable;            // p' <= p, i.e. reachable with gamma_sd >= 0
};

// How a depolarizing parameter p becomes a pair state.
enum class Convention {
  Paper,   // werner_paper(1 - p), E_R from 1 - H2((1+F)/2)
  Oracle,  // actual channel output, Bell weights (1-p, p/3, p/3, p/3), exact E_R
};

const char* convention_name(Convention c);
BellDiagonalState depolarized_pair(double p, Convention c);
double depolarized_pair_er(double p, Convention c);

// Depolarizing p' with depolarized_pair_er(p', c) == target_er.
PesCalibration calibrate_pes(double p, double target_er, Convention c);

// Depolarizing p' whose Werner closed form (under `bridge`, with F' = 1 - p')
// equals target_er.
PesCalibration calibrate_pes(double p, double target_er, entanglement::WernerBridge bridge);

struct RotationSearch {
  double theta;
  double phi;
  double best_er;
  double worst_er;
  std::size_t evaluations;
  bool all_converged;
};

// Grid over U = Rz(phi) Ry(theta) on the transmitted half before
// amplitude_damping(gamma); maximises the E_R upper bound. theta spans
// [0, pi], phi spans [0, 2pi); ties (within 1e-6, the solver resolution) keep the
// first point in scan order.
RotationSearch pre_rotation_search_ad(double gamma, std::size_t grid,
                                      const entanglement::SolverSettings& solver = {});

struct HashingRate {
  double value;
  bool negative;
};
// 1 - H2(p) - p log2 3, unclamped.
HashingRate hashing_rate(double p);

// p_s * E_R(selected) / pairs consumed.
double effective_rate(const DistillationOutcome& outcome);

}  // namespace entshape::protocols
