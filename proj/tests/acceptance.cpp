// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "entshape/channels.hpp"
#include "entshape/dynamics.hpp"
#include "entshape/entanglement.hpp"
#include "entshape/harness.hpp"
#include "entshape/protocols.hpp"
#include "oracles.hpp"

using namespace entshape;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kErAgreement = 5e-3;       // bits, numeric vs closed form
constexpr double kBellTolerance = 5e-3;     // bits, numeric E_R of psi+
constexpr double kPureExact = 1e-12;        // er_pure vs S(rho_A)
constexpr double kRateRelTol = 1e-6;        // rate vs central differences
constexpr double kFdStep = 1e-5;
constexpr double kMinSeparation = 5.0;      // PES / post per-pair E_R
constexpr double kStandardErrors = 3.0;
constexpr double kSuccessClaim = 0.31, kSuccessSpread = 0.06;
constexpr double kCalibrationTol = 1e-9;    // bits, calibrated PES E_R vs 0.187
constexpr double kPesTarget = 0.187;
constexpr double kPropertyTol = 1e-3;       // bits, solver slack in property suites

constexpr double kGridSeconds = 60.0;
constexpr double kRateSeconds = 5.0;
constexpr double kMonteCarloSeconds = 300.0;
constexpr std::size_t kRuns = 10000;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %-40s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const harness::Discrepancy* find_claim(const harness::ExperimentResult& r, const std::string& id) {
  for (const auto& d : r.discrepancies)
    if (d.id == id) return &d;
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void werner_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  entanglement::RelativeEntropySolver solver;
  double worst = 0.0, worst_f = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double f = 0.55 + 0.04 * i;
    const auto s = qstate::werner_paper(f);
    const double gap = std::abs(solver.minimize(s.to_density()).value - entanglement::er_bell_diagonal(s).value);
    if (gap > worst) worst = gap, worst_f = f;
  }
  const double secs = seconds_since(t0);
  report(1, "numeric vs closed-form E_R (Werner)", worst <= kErAgreement && secs < kGridSeconds,
         fmt("max gap %.2e at F=%.2f (tol %.0e), %.1f s", worst, worst_f, kErAgreement, secs));
}

void pure_state() {
  const double bell = entanglement::er_numeric(qstate::bell_state(qstate::Bell::PsiPlus)).value;
  oracle::Gen g(2);
  double worst = std::abs(entanglement::er_pure(qstate::bell_vector(qstate::Bell::PsiPlus)).value - 1.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXcd psi = g.ginibre(4, 1).col(0);
    psi.normalize();
    const oracle::CMat rho = psi * psi.adjoint();
    worst = std::max(worst, std::abs(entanglement::er_pure(psi).value -
                                     oracle::entropy_bits(oracle::partial_trace_pair(rho, 0))));
  }
  report(2, "pure-state oracle", std::abs(bell - 1.0) <= kBellTolerance && worst <= kPureExact,
         fmt("E_R(psi+) = %.5f, max |er_pure - S(rho_A)| = %.1e over 51 states", bell, worst));
}

void rate_check() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double f = 0.55 + 0.04 * i, p = 0.05 + 0.05 * j;
      const double fd = (dynamics::er_of_fidelity(f * std::exp(-p * kFdStep)) -
                         dynamics::er_of_fidelity(f * std::exp(p * kFdStep))) /
                        (2 * kFdStep);
      worst = std::max(worst, std::abs(fd - dynamics::er_production_rate(f, p)) / std::abs(fd));
    }
  const double secs = seconds_since(t0);
  report(3, "production rate vs finite differences", worst <= kRateRelTol && secs < kRateSeconds,
         fmt("max rel err %.1e on 10x10 grid, %.3f s", worst, secs));
}

void suppression() {
  std::size_t points = 0, bad = 0;
  for (double T : {0.5, 1.0, 2.0})
    for (int i = 1; i <= 10; ++i) {
      const double p = 0.05 * i;
      if (std::exp(-p * T) <= 0.5) continue;
      for (int j = 0; j < i; ++j) {
        ++points;
        if (!(dynamics::delta_er(p, 0.05 * j, 1.0, T).value > 0.0)) ++bad;
      }
    }
  bool zero = true;
  for (double p : {0.0, 0.1, 0.3, 0.5})
    for (double T : {0.5, 1.0, 2.0}) zero = zero && dynamics::delta_er(p, p, 1.0, T).value == 0.0;
  report(4, "suppression positive, zero at p'=p", bad == 0 && zero,
         fmt("%zu grid points, %zu non-positive; equal-rate cases %s", points, bad, zero ? "exactly 0" : "NONZERO"));
}

harness::ExperimentResult table1_result;

void separation() {
  const auto t0 = std::chrono::steady_clock::now();
  harness::ExperimentConfig cfg;
  cfg.experiment = harness::Experiment::Table1;
  cfg.run_count = kRuns;
  table1_result = harness::run(cfg);
  const double secs = seconds_since(t0);

  // Both conventions: post from Monte Carlo at the configured reading, PES at p' = 0.17.
  std::map<std::string, double> post, pes;
  for (const auto& row : table1_result.data["rows"]) {
    const std::string conv = row["input"];
    if (row["protocol"] == "dejmps" && row["n_pairs"] == cfg.n_pairs && row["rounds"] == cfg.rounds)
      post[conv] = row["monte_carlo"]["er_global_per_pair"]["mean"];
    if (row["protocol"] == "pes") pes[conv] = row["er_per_pair"];
  }
  bool pass = secs < kMonteCarloSeconds && post.size() == 2 && pes.size() == 2;
  std::string detail;
  for (const auto& [conv, v] : post) {
    const double ratio = pes[conv] / v;
    pass = pass && ratio >= kMinSeparation;
    detail += fmt("%s %.4f/%.5f = %.1fx; ", conv.c_str(), pes[conv], v, ratio);
  }
  if (const auto* d = find_claim(table1_result, "fig1.ratio"))
    detail += fmt("factor-14 figure: computed %.1f (%s); ", d->computed, d->reproduced ? "reproduced" : "discrepancy");
  detail += fmt("%zu runs, %.1f s", kRuns, secs);
  report(5, "PES vs post separation (p=0.2, p'=0.17)", pass, detail);
}

void mc_oracle() {
  bool pass = true;
  std::string detail;
  for (double f : {0.7, 0.8, 0.9}) {
    const auto in = qstate::werner_paper(f);
    const auto exact = protocols::dejmps_recursive(4, in, 2);
    const auto mc = protocols::dejmps_monte_carlo(4, in, 2, kRuns, 777, 0);
    const double zp = std::abs(mc.success_probability.mean - exact.success_probability) /
                      mc.success_probability.standard_error;
    const double zf =
        std::abs(mc.global_fidelity.mean - exact.global_bell().fidelity()) / mc.global_fidelity.standard_error;
    pass = pass && zp <= kStandardErrors && zf <= kStandardErrors;
    detail += fmt("F=%.1f z(p_s)=%.2f z(F)=%.2f; ", f, zp, zf);
  }
  report(6, "Monte Carlo vs exact branch tree", pass, detail + fmt("%zu runs", kRuns));
}

void table1_reproduction() {
  const auto& r = table1_result;
  bool within = false;
  std::string detail;
  for (const auto& row : r.data["rows"]) {
    if (row["protocol"] != "dejmps") continue;
    const double ps = row["exact"]["success_probability"];
    if (std::abs(ps - kSuccessClaim) <= kSuccessSpread) {
      if (!within)
        detail += fmt("p_s %.4f (%s, %d pairs, %d rounds); ", ps, std::string(row["input"]).c_str(),
                      int(row["n_pairs"]), int(row["rounds"]));
      within = true;
    }
  }
  if (!within) detail += "p_s outside 0.31+-0.06 under every convention; ";

  bool calibrated = false;
  for (const auto& row : r.data["rows"]) {
    if (row["protocol"] != "pes_calibrated") continue;
    const double er = row["er_per_pair"], pp = row["p_prime"];
    const bool hit = std::abs(er - kPesTarget) <= kCalibrationTol;
    calibrated = calibrated || hit;
    detail += fmt("calibrated p'=%.6f (%s) -> %.6f; ", pp, std::string(row["input"]).c_str(), er);
  }

  const std::string md = harness::discrepancy_report({r});
  bool entries = true;
  for (const char* id : {"arith.h2_0915", "rate.hashing_p02", "channel.eb_threshold", "dd.limit"}) {
    const bool present = md.find(id) != std::string::npos;
    entries = entries && present;
    if (!present) detail += fmt("missing %s; ", id);
  }
  std::size_t misses = 0;
  for (const auto& d : r.discrepancies) misses += !d.reproduced;
  detail += fmt("%zu discrepancies reported", misses);
  report(7, "depolarizing table reproduction", within && calibrated && entries, detail);
}

void table2_analogue() {
  harness::ExperimentConfig cfg;
  cfg.experiment = harness::Experiment::Table2;
  cfg.run_count = kRuns;
  const auto r = harness::run(cfg);
  bool pass = r.ok();
  std::string detail;
  for (const char* id : {"table2.dejmps.er_global", "table2.dejmps.success_probability", "table2.pes.er"}) {
    const auto* d = find_claim(r, id);
    if (!d) {
      pass = false;
      detail += fmt("%s missing; ", id);
      continue;
    }
    detail += fmt("%s %.4f vs %.3f %s; ", id + 7, d->computed, d->claimed.value_or(NAN),
                  d->reproduced ? "reproduced" : "discrepancy");
  }
  pass = pass && harness::discrepancy_report({r}).find("table2.pes.er") != std::string::npos;
  report(8, "amplitude-damping table (gamma=0.3)", pass, detail);
}

void property_suites() {
  oracle::Gen g(9090);
  entanglement::RelativeEntropySolver solver;
  auto pair = [](const oracle::CMat& m) { return qstate::DensityMatrix(m, {2, 2}); };
  double worst_locc = -1e9, worst_convex = -1e9;
  for (int i = 0; i < 20; ++i) {
    const auto rho = pair(g.entangled_pair(g.uniform(0.3, 0.9)));
    const double before = solver.minimize(rho).value;
    double after;
    if (i % 2 == 0) {
      const channels::QuantumChannel ch(g.kraus(2, 1 + i % 3));
      after = solver.minimize(channels::apply(ch, rho, static_cast<std::size_t>((i / 2) % 2))).value;
    } else {
      after = entanglement::er_bell_diagonal(qstate::BellDiagonalState::project(rho)).value;
    }
    worst_locc = std::max(worst_locc, after - before);
  }
  for (int i = 0; i < 20; ++i) {
    const auto a = pair(g.entangled_pair(g.uniform(0.3, 0.9)));
    const auto b = pair(g.entangled_pair(g.uniform(0.3, 0.9)));
    const double t = g.uniform(0.1, 0.9);
    const std::array<double, 2> w{t, 1 - t};
    const std::array<qstate::DensityMatrix, 2> st{a, b};
    const double mixed = solver.minimize(qstate::mixture(w, st)).value;
    worst_convex = std::max(worst_convex, mixed - (t * solver.minimize(a).value + (1 - t) * solver.minimize(b).value));
  }
  report(9, "LOCC monotonicity and convexity", worst_locc <= kPropertyTol && worst_convex <= kPropertyTol,
         fmt("max increase under LOCC %.1e, max convexity excess %.1e (tol %.0e), 20 states each", worst_locc,
             worst_convex, kPropertyTol));
}

void determinism() {
  const auto base = fs::temp_directory_path() / "entshape_acceptance";
  fs::remove_all(base);
  ::unsetenv("ENTSHAPE_WORKERS");  // would override the explicit worker counts below
  harness::ExperimentConfig cfg;
  cfg.experiment = harness::Experiment::Table1;
  cfg.run_count = kRuns;
  cfg.workers = 1;
  harness::write_result(table1_result, base / "a");
  harness::write_result(harness::run(cfg), base / "serial");
  cfg.workers = 8;
  harness::write_result(harness::run(cfg), base / "eight");
  const std::string a = slurp(base / "a" / "result.json");
  const bool same_seed = !a.empty() && a == slurp(base / "serial" / "result.json");
  const bool workers = a == slurp(base / "eight" / "result.json");
  report(10, "determinism", same_seed && workers,
         fmt("repeat run %s, serial vs 8 workers %s (%zu bytes)", same_seed ? "byte-identical" : "DIFFERS",
             workers ? "identical" : "DIFFER", a.size()));
}

}  // namespace

int main() {
  const std::array<std::function<void()>, 10> criteria{werner_grid,         pure_state,     rate_check,
                                                        suppression,         separation,     mc_oracle,
                                                        table1_reproduction, table2_analogue, property_suites,
                                                        determinism};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
