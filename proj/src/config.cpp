#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "entshape/errors.hpp"
#include "entshape/harness.hpp"
#include "entshape/protocols.hpp"

namespace entshape::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x)) bad(key, v, "expected a number");
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad(key, v, "expected a non-negative integer");
  return x;
}

std::vector<Reading> to_readings(std::string_view key, std::string_view v) {
  std::vector<Reading> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
    if (item.empty()) continue;
    const auto x = item.find('x');
    if (x == std::string_view::npos) bad(key, item, "expected <pairs>x<rounds>");
    out.push_back({to_u64(key, trim(item.substr(0, x))), to_u64(key, trim(item.substr(x + 1)))});
  }
  return out;
}

bool power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_reading(const Reading& r, std::string_view what) {
  if (!power_of_two(r.n_pairs)) throw ConfigError(std::string(what) + ": pairs must be a power of two");
  if ((std::size_t{1} << r.rounds) > r.n_pairs) throw ConfigError(std::string(what) + ": rounds exceed log2(pairs)");
  if (r.n_pairs > (std::size_t{1} << 12)) throw ConfigError(std::string(what) + ": at most 4096 pairs");
}

}  // namespace

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Table1: return "table1";
    case Experiment::Table2: return "table2";
    case Experiment::Flow: return "flow";
    case Experiment::Sweep: return "sweep";
    case Experiment::ErSingle: return "er_single";
    case Experiment::SelfCheck: return "selfcheck";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (auto e : {Experiment::Table1, Experiment::Table2, Experiment::Flow, Experiment::Sweep, Experiment::ErSingle,
                 Experiment::SelfCheck})
    if (name == experiment_name(e)) return e;
  return std::nullopt;
}

const char* convention_choice_name(ConventionChoice c) {
  switch (c) {
    case ConventionChoice::Paper: return "paper";
    case ConventionChoice::Oracle: return "oracle";
    case ConventionChoice::Both: return "both";
  }
  return "?";
}

std::optional<ConventionChoice> parse_convention(std::string_view name) {
  for (auto c : {ConventionChoice::Paper, ConventionChoice::Oracle, ConventionChoice::Both})
    if (name == convention_choice_name(c)) return c;
  return std::nullopt;
}

void set_option(ExperimentConfig& c, std::string_view key, std::string_view v) {
  if (key == "experiment") {
    const auto e = parse_experiment(v);
    if (!e) bad(key, v, "unknown experiment");
    c.experiment = *e;
  } else if (key == "convention") {
    const auto cc = parse_convention(v);
    if (!cc) bad(key, v, "expected paper, oracle or both");
    c.convention = *cc;
  } else if (key == "p") c.p = to_double(key, v);
  else if (key == "gamma") c.gamma = to_double(key, v);
  else if (key == "n_pairs") c.n_pairs = to_u64(key, v);
  else if (key == "rounds") c.rounds = to_u64(key, v);
  else if (key == "extra_readings") c.extra_readings = to_readings(key, v);
  else if (key == "run_count" || key == "runs") c.run_count = to_u64(key, v);
  else if (key == "master_seed" || key == "seed") c.master_seed = to_u64(key, v);
  else if (key == "dd_mode") c.dd_mode = std::string(v);
  else if (key == "dd_pulses") c.dd_pulses = to_u64(key, v);
  else if (key == "dd_frequency") c.dd_frequency = to_double(key, v);
  else if (key == "dd_gamma_sd") c.dd_gamma_sd = to_double(key, v);
  else if (key == "pes_target_er") c.pes_target_er = to_double(key, v);
  else if (key == "rotation_grid") c.rotation_grid = to_u64(key, v);
  else if (key == "slices") c.slices = to_u64(key, v);
  else if (key == "ad_delta_gamma") c.ad_delta_gamma = to_double(key, v);
  else if (key == "f0") c.f0 = to_double(key, v);
  else if (key == "t_final") c.t_final = to_double(key, v);
  else if (key == "step") c.step = to_double(key, v);
  else if (key == "sweep_p_min") c.sweep_p_min = to_double(key, v);
  else if (key == "sweep_p_max") c.sweep_p_max = to_double(key, v);
  else if (key == "sweep_points") c.sweep_points = to_u64(key, v);
  else if (key == "state") c.state = std::string(v);
  else if (key == "fidelity") c.fidelity = to_double(key, v);
  else if (key == "workers") c.workers = to_u64(key, v);
  else if (key == "out_dir") c.out_dir = std::string(v);
  else bad(key, v, "unknown key");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    try {
      set_option(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.p > 0.0 && c.p <= 0.75, "p must lie in (0, 3/4]");
  require(c.gamma >= 0.0 && c.gamma <= 1.0, "gamma must lie in [0, 1]");
  check_reading({c.n_pairs, c.rounds}, "n_pairs/rounds");
  for (const auto& r : c.extra_readings) check_reading(r, "extra_readings");
  require(c.run_count >= protocols::kMonteCarloBatches, "run_count must be at least 20");
  require(c.run_count <= 100'000'000, "run_count must be at most 1e8");
  require(c.dd_mode == "parametric" || c.dd_mode == "pulse_average", "dd_mode must be parametric or pulse_average");
  require(c.dd_pulses >= 1, "dd_pulses must be at least 1");
  require(c.dd_frequency > 0.0, "dd_frequency must be positive");
  require(c.dd_gamma_sd >= 0.0, "dd_gamma_sd must be non-negative");
  require(c.pes_target_er >= 0.0 && c.pes_target_er <= 1.0, "pes_target_er must lie in [0, 1]");
  require(c.rotation_grid >= 1 && c.rotation_grid <= 64, "rotation_grid must lie in [1, 64]");
  require(c.slices >= 1 && c.slices <= 1 << 16, "slices must lie in [1, 65536]");
  require(c.ad_delta_gamma >= 0.0 && c.ad_delta_gamma <= 1.0, "ad_delta_gamma must lie in [0, 1]");
  require(c.f0 > 0.0 && c.f0 <= 1.0, "f0 must lie in (0, 1]");
  require(c.t_final > 0.0, "t_final must be positive");
  require(c.step > 0.0 && c.t_final / c.step <= 1e6, "step must be positive and give at most 1e6 samples");
  require(c.sweep_p_min > 0.0 && c.sweep_p_min <= c.sweep_p_max && c.sweep_p_max <= 0.75,
          "sweep range must satisfy 0 < sweep_p_min <= sweep_p_max <= 3/4");
  require(c.sweep_points >= 1 && c.sweep_points <= 10000, "sweep_points must lie in [1, 10000]");
  require(c.state == "werner_paper" || c.state == "werner_channel" || c.state == "amplitude_damping" ||
              c.state == "bell",
          "state must be werner_paper, werner_channel, amplitude_damping or bell");
  require(c.fidelity >= 0.0 && c.fidelity <= 1.0, "fidelity must lie in [0, 1]");
  require(c.workers <= 1024, "workers must be at most 1024");
  require(!c.out_dir.empty(), "out_dir must not be empty");
}

std::size_t resolve_workers(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("ENTSHAPE_WORKERS"); env && *env) {
    std::size_t n = 0;
    const std::string_view v(env);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || ptr != v.data() + v.size() || n == 0 || n > 1024)
      throw ConfigError("ENTSHAPE_WORKERS must be an integer in [1, 1024]");
    return n;
  }
  if (cfg.workers > 0) return cfg.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace entshape::harness
