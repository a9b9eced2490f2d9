// entshape: run reproduction experiments and write result files.
//
// Exit codes: 0 success, 1 invariant/selfcheck failure, 2 configuration
// error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "entshape/errors.hpp"
#include "entshape/harness.hpp"

namespace hs = entshape::harness;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::string out;
  std::string convention;
  bool quiet = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value configuration file");
  sub->add_option("--seed", o.seed, "master seed (u64)");
  sub->add_option("--runs", o.runs, "Monte Carlo runs");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--convention", o.convention, "paper | oracle | both")
      ->check(CLI::IsMember({"paper", "oracle", "both"}));
  sub->add_flag("--quiet", o.quiet, "only print failures");
}

void print_summary(const hs::ExperimentResult& r, const std::string& dir) {
  std::printf("%s: wrote %s (%.1f s)\n", hs::experiment_name(r.config.experiment), dir.c_str(),
              r.wall_clock_seconds);
  for (const auto& c : r.checks)
    std::printf("  [%s] %s%s%s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                c.detail.c_str());
  for (const auto& d : r.discrepancies) {
    if (d.claimed)
      std::printf("  %-12s %-40s claimed %-10.4g computed %.4g (%s)\n", d.reproduced ? "reproduced" : "discrepancy",
                  d.id.c_str(), *d.claimed, d.computed, d.convention.c_str());
    else
      std::printf("  %-12s %-40s claimed \"%s\" computed %.4g\n", d.reproduced ? "reproduced" : "discrepancy",
                  d.id.c_str(), d.claimed_text.c_str(), d.computed);
  }
}

int execute(hs::Experiment experiment, const Options& o) {
  hs::ExperimentConfig cfg = o.config.empty() ? hs::ExperimentConfig{} : hs::load_config(o.config);
  cfg.experiment = experiment;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.runs) cfg.run_count = *o.runs;
  if (!o.convention.empty()) cfg.convention = *hs::parse_convention(o.convention);
  if (!o.out.empty()) cfg.out_dir = o.out;
  hs::validate(cfg);
  hs::resolve_workers(cfg);  // reject a malformed ENTSHAPE_WORKERS before any work

  const auto result = hs::run(cfg);
  hs::write_result(result, cfg.out_dir);
  if (!o.quiet) {
    print_summary(result, cfg.out_dir);
  } else {
    for (const auto& c : result.checks)
      if (!c.passed) std::fprintf(stderr, "FAIL %s: %s\n", c.name.c_str(), c.detail.c_str());
  }
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement shaping reproduction experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hs::kVersion);

  Options o;
  struct Sub {
    const char* name;
    const char* help;
    hs::Experiment experiment;
  };
  const Sub subs[] = {
      {"table1", "depolarizing comparison: DEJMPS vs shaping", hs::Experiment::Table1},
      {"table2", "amplitude damping comparison", hs::Experiment::Table2},
      {"flow", "trajectories on the E_R / mixedness plane (CSV)", hs::Experiment::Flow},
      {"sweep", "parameter sweep over p", hs::Experiment::Sweep},
      {"er", "relative entropy of entanglement of one state", hs::Experiment::ErSingle},
      {"check", "oracle self-check", hs::Experiment::SelfCheck},
  };
  std::optional<hs::Experiment> chosen;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, o);
    sub->callback([&chosen, e = s.experiment] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return execute(*chosen, o);
  } catch (const entshape::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const entshape::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
