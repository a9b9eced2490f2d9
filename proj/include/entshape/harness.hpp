#pragma once

// Experiment orchestration: configuration, dispatch, discrepancy reporting
// and result files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entshape/dynamics.hpp"

namespace entshape::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { Table1, Table2, Flow, Sweep, ErSingle, SelfCheck };
enum class ConventionChoice { Paper, Oracle, Both };

const char* experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);
const char* convention_choice_name(ConventionChoice c);
std::optional<ConventionChoice> parse_convention(std::string_view name);

// A (pairs, rounds) reading of the distillation setup.
struct Reading {
  std::size_t n_pairs;
  std::size_t rounds;
  bool operator==(const Reading&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Table1;
  ConventionChoice convention = ConventionChoice::Both;

  double p = 0.2;      // depolarizing strength
  double gamma = 0.3;  // amplitude damping strength

  std::size_t n_pairs = 4;
  std::size_t rounds = 2;
  std::vector<Reading> extra_readings{{8, 3}, {128, 7}};
  std::size_t run_count = 10000;
  std::uint64_t master_seed = 20240601;

  // Decoupling. Parametric: p' = p exp(-dd_gamma_sd / dd_frequency); the
  // default ratio gives p' = 0.17 at p = 0.2.
  std::string dd_mode = "parametric";  // parametric | pulse_average
  std::size_t dd_pulses = 100;
  double dd_frequency = 1.0;
  double dd_gamma_sd = 0.16251892949777494;  // ln(1/0.85)
  double pes_target_er = 0.187;

  // table2
  std::size_t rotation_grid = 9;
  std::size_t slices = 256;
  double ad_delta_gamma = 0.5;

  // flow / sweep
  double f0 = 1.0;
  double t_final = 1.0;
  double step = 0.05;
  double sweep_p_min = 0.02;
  double sweep_p_max = 0.5;
  std::size_t sweep_points = 13;

  // er_single
  std::string state = "werner_paper";  // werner_paper | werner_channel | amplitude_damping | bell
  double fidelity = 0.8;

  std::size_t workers = 0;  // 0: ENTSHAPE_WORKERS, else hardware concurrency
  std::string out_dir = "results";
};

// `key = value` lines, `#` starts a comment. Unknown keys and malformed
// values throw ConfigError; the result is validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies one key/value pair; throws ConfigError.
void set_option(ExperimentConfig& cfg, std::string_view key, std::string_view value);
void validate(const ExperimentConfig& cfg);

// ENTSHAPE_WORKERS, then cfg.workers, then hardware concurrency.
std::size_t resolve_workers(const ExperimentConfig& cfg);

struct Discrepancy {
  std::string id;
  std::string location;  // quoted text of the claim
  std::optional<double> claimed;
  std::string claimed_text;  // for claims without a single number
  double computed = 0.0;
  double tolerance = 0.0;  // absolute; 0 for qualitative claims
  std::string convention;
  bool reproduced = false;
  std::string note;

  double abs_gap() const;
  double rel_gap() const;  // NaN without a numeric claim
};

// Numeric claim: reproduced iff |computed - claimed| <= tolerance.
Discrepancy numeric_claim(std::string id, std::string location, double claimed, double tolerance, double computed,
                          std::string convention, std::string note = {});
// Tolerance used when a claim carries no spread: 10 % of the claimed value.
inline constexpr double kNoSpreadRelTol = 0.10;
// Claimed spreads are widened by this factor.
inline constexpr double kSpreadFactor = 3.0;

struct CheckLine {
  std::string name;
  bool passed;
  std::string detail;
};

struct Landmark {
  std::string label;
  double er_bits;
  double mixedness;
};

struct ExperimentResult {
  ExperimentConfig config;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  std::vector<Discrepancy> discrepancies;
  std::vector<CheckLine> checks;
  std::optional<dynamics::TrajectoryPair> trajectories;
  std::vector<Landmark> landmarks;
  double wall_clock_seconds = 0.0;

  bool ok() const;
};

ExperimentResult run(const ExperimentConfig& cfg);

// Claims every report carries: binary entropy arithmetic, hashing rate sign,
// entanglement-breaking threshold, decoupling limit, production-rate sign,
// literal pulse average.
std::vector<Discrepancy> standard_discrepancies();

std::string discrepancy_report(const std::vector<ExperimentResult>& results);

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
// Everything except wall-clock time, which varies between runs.
nlohmann::ordered_json to_json(const ExperimentResult& result);

// Writes via a sibling temporary file and rename.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

// result.json, timing.json, discrepancies.md and, for trajectories, the flow
// CSVs. Throws IoError with the failing path.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);

// post.csv / pes.csv with header t,fidelity,er_bits,mixedness and
// landmarks.csv with label,er_bits,mixedness.
void emit_flow_data(const dynamics::TrajectoryPair& trajectories, const std::vector<Landmark>& landmarks,
                    const std::filesystem::path& dir);
std::vector<dynamics::TrajectorySample> read_flow_csv(const std::filesystem::path& path);

}  // namespace entshape::harness
