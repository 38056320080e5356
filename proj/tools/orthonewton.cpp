#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orthonewton/errors.hpp"
#include "orthonewton/harness.hpp"
#include "orthonewton/properties.hpp"

namespace on = orthonewton;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStalled = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> retraction;
  std::optional<std::string> hessian;

  on::ConfigOverrides overrides(bool default_out_dir) const {
    on::ConfigOverrides o;
    o.seed = seed;
    o.retraction = retraction;
    o.hessian = hessian;
    if (out_dir) {
      o.out_dir = std::filesystem::path(*out_dir);
    } else if (default_out_dir) {
      o.out_dir = std::filesystem::path(".");
    }
    return o;
  }
};

on::ExperimentConfig load(const std::string& path, const on::ConfigOverrides& overrides) {
  try {
    on::ExperimentConfig cfg = on::load_config(path);
    on::apply_overrides(cfg, overrides);
    return cfg;
  } catch (const on::ConfigError& e) {
    throw on::ConfigError(path + ": " + e.what(), e.field(), e.line());
  }
}

int status_exit(on::SolveStatus status) {
  return status == on::SolveStatus::converged ? kExitOk : kExitStalled;
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  on::ExperimentConfig cfg = load(path, flags.overrides(false));
  const on::ExperimentResult r = on::run_experiment(cfg);
  const on::IterationRecord& last = r.log.rows.back();
  std::printf("solver     %s\nstatus     %s\niterations %d\nenergy     %.16e\ngrad_norm  %.3e\n",
              r.log.solver.c_str(), on::to_string(r.log.status).c_str(), r.solve.iterations(),
              last.energy, last.grad_norm);
  if (r.solve.reorthonormalizations > 0) {
    std::printf("reorthonormalizations %d\n", r.solve.reorthonormalizations);
  }
  if (r.solve.steepest_fallbacks > 0) {
    std::printf("steepest-descent fallbacks %d\n", r.solve.steepest_fallbacks);
  }
  if (!cfg.output.empty()) std::printf("log        %s\n", cfg.output.c_str());
  return status_exit(r.log.status);
}

int cmd_compare(const std::vector<std::string>& paths, const CommonFlags& flags) {
  std::vector<on::ExperimentConfig> configs;
  for (const std::string& p : paths) configs.push_back(load(p, flags.overrides(true)));
  const on::CompareSummary summary = on::compare(configs);
  on::print_summary(summary, std::cout);
  int code = kExitOk;
  for (const on::CompareRow& row : summary.rows) code = std::max(code, status_exit(row.status));
  return code;
}

int cmd_props(const CommonFlags& flags) {
  const std::uint64_t seed = flags.seed.value_or(20240601);
  int failed = 0;
  on::run_property_suite(seed, [&](const on::PropertyOutcome& o) {
    if (!o.passed) ++failed;
    std::printf("%s  %-60s measured %.3e bound %.3e%s%s\n", o.passed ? "PASS" : "FAIL",
                o.name.c_str(), o.measured, o.threshold, o.detail.empty() ? "" : "  ",
                o.detail.c_str());
    std::fflush(stdout);
  });
  std::printf("%d failed\n", failed);
  return failed == 0 ? kExitOk : kExitStalled;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact Riemannian Newton solvers on the Grassmann manifold"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", flags.seed, "Seed of the initial guess");
    cmd->add_option("--out-dir", flags.out_dir, "Directory for CSV logs");
    cmd->add_option("--retraction", flags.retraction, "qr | pd | wy | ga-pade2 | ga-pade3 | geodesic");
    cmd->add_option("--hessian", flags.hessian, "Hessian used by the solvers")
        ->check(CLI::IsMember({"exact", "approx"}));
  };

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", run_config, "Experiment config (JSON)")->required();
  add_common(run);

  std::vector<std::string> compare_configs;
  CLI::App* cmp = app.add_subcommand("compare", "Run several solvers on one instance and summarize");
  cmp->add_option("config", compare_configs, "Experiment configs (JSON)")->required();
  add_common(cmp);

  CLI::App* props = app.add_subcommand("props", "Run the invariant suite");
  add_common(props);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, flags);
    if (*cmp) return cmd_compare(compare_configs, flags);
    return cmd_props(flags);
  } catch (const on::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitStalled;
  }
}
