#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "entshape/errors.hpp"
#include "entshape/harness.hpp"

namespace entshape::harness {

using json = nlohmann::ordered_json;

namespace {

// Shortest representation that parses back to the same double.
std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fixed(double x, int digits = 4) {
  if (std::isnan(x)) return "-";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << x;
  return ss.str();
}

json discrepancy_json(const Discrepancy& d) {
  json j = {{"id", d.id}, {"location", d.location}};
  j["claimed"] = d.claimed ? json(*d.claimed) : json(d.claimed_text);
  j["computed"] = d.computed;
  j["abs_gap"] = d.claimed ? json(d.abs_gap()) : json(nullptr);
  j["rel_gap"] = d.claimed && *d.claimed != 0.0 ? json(d.rel_gap()) : json(nullptr);
  j["tolerance"] = d.tolerance;
  j["convention"] = d.convention;
  j["status"] = d.reproduced ? "reproduced" : "discrepancy";
  j["note"] = d.note;
  return j;
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  json readings = json::array();
  for (const auto& r : c.extra_readings) readings.push_back({{"n_pairs", r.n_pairs}, {"rounds", r.rounds}});
  // Worker count is deliberately absent: results do not depend on it.
  return {{"experiment", experiment_name(c.experiment)},
          {"convention", convention_choice_name(c.convention)},
          {"p", c.p},
          {"gamma", c.gamma},
          {"n_pairs", c.n_pairs},
          {"rounds", c.rounds},
          {"extra_readings", readings},
          {"run_count", c.run_count},
          {"master_seed", c.master_seed},
          {"dd_mode", c.dd_mode},
          {"dd_pulses", c.dd_pulses},
          {"dd_frequency", c.dd_frequency},
          {"dd_gamma_sd", c.dd_gamma_sd},
          {"pes_target_er", c.pes_target_er},
          {"rotation_grid", c.rotation_grid},
          {"slices", c.slices},
          {"ad_delta_gamma", c.ad_delta_gamma},
          {"f0", c.f0},
          {"t_final", c.t_final},
          {"step", c.step},
          {"sweep_p_min", c.sweep_p_min},
          {"sweep_p_max", c.sweep_p_max},
          {"sweep_points", c.sweep_points},
          {"state", c.state},
          {"fidelity", c.fidelity}};
}

json to_json(const ExperimentResult& r) {
  json j;
  j["library_version"] = kVersion;
  j["experiment"] = experiment_name(r.config.experiment);
  j["config"] = config_to_json(r.config);
  j["results"] = r.data;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  json disc = json::array();
  for (const auto& d : r.discrepancies) disc.push_back(discrepancy_json(d));
  j["discrepancies"] = disc;
  j["ok"] = r.ok();
  return j;
}

std::string discrepancy_report(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "# Discrepancy report\n\n";
  out << "Status is `reproduced` when |computed - claimed| is within tolerance (3x the quoted spread, "
         "10 % without one, half a unit in the last digit for arithmetic), `discrepancy` otherwise.\n";
  for (const auto& r : results) {
    out << "\n## " << experiment_name(r.config.experiment) << " (seed " << r.config.master_seed << ", "
        << r.config.run_count << " runs)\n\n";
    if (r.discrepancies.empty()) {
      out << "No claims evaluated.\n";
      continue;
    }
    out << "| id | status | claimed | computed | abs gap | rel gap | convention |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& d : r.discrepancies)
      out << "| " << d.id << " | " << (d.reproduced ? "reproduced" : "discrepancy") << " | "
          << (d.claimed ? fixed(*d.claimed) : d.claimed_text) << " | " << fixed(d.computed) << " | "
          << fixed(d.abs_gap()) << " | " << fixed(d.rel_gap(), 3) << " | " << d.convention << " |\n";
    out << "\n";
    for (const auto& d : r.discrepancies) {
      out << "- **" << d.id << "**: " << d.location << ".";
      if (!d.note.empty()) out << " " << d.note;
      out << "\n";
    }
  }
  return out.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void emit_flow_data(const dynamics::TrajectoryPair& t, const std::vector<Landmark>& landmarks,
                    const std::filesystem::path& dir) {
  if (t.post.samples.empty() || t.pes.samples.empty()) throw InvalidArgument("emit_flow_data: empty trajectory");
  auto csv = [](const dynamics::EntropyTrajectory& tr) {
    std::string s = "t,fidelity,er_bits,mixedness\n";
    for (const auto& x : tr.samples)
      s += fmt(x.t) + "," + fmt(x.fidelity) + "," + fmt(x.er_bits) + "," + fmt(x.mixedness) + "\n";
    return s;
  };
  atomic_write(dir / "post.csv", csv(t.post));
  atomic_write(dir / "pes.csv", csv(t.pes));
  std::string pts = "label,er_bits,mixedness\n";
  for (const auto& l : landmarks) pts += l.label + "," + fmt(l.er_bits) + "," + fmt(l.mixedness) + "\n";
  atomic_write(dir / "landmarks.csv", pts);
}

std::vector<dynamics::TrajectorySample> read_flow_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,fidelity,er_bits,mixedness")
    throw IoError(path.string() + ": unexpected header");
  std::vector<dynamics::TrajectorySample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v[4];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 4; ++k) {
      const auto r = std::from_chars(p, end, v[k]);
      if (r.ec != std::errc{} || (k < 3 && (r.ptr == end || *r.ptr != ',')) || (k == 3 && r.ptr != end))
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
      p = r.ptr + 1;
    }
    out.push_back({v[0], v[1], v[2], v[3]});
  }
  return out;
}

void write_result(const ExperimentResult& result, const std::filesystem::path& dir) {
  atomic_write(dir / "result.json", to_json(result).dump(2) + "\n");
  const json timing = {{"wall_clock_seconds", result.wall_clock_seconds}, {"library_version", kVersion}};
  atomic_write(dir / "timing.json", timing.dump(2) + "\n");
  atomic_write(dir / "discrepancies.md", discrepancy_report({result}));
  if (result.trajectories) emit_flow_data(*result.trajectories, result.landmarks, dir);
}

}  // namespace entshape::harness
