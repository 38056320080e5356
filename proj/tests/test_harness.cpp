#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "orthonewton/errors.hpp"
#include "orthonewton/harness.hpp"

namespace on = orthonewton;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "newton-bt"})";

const char* kKs = R"({
  "model": "ks1d",
  "n_g": 32,
  "n": 2,
  "box_length": 8.0,
  "atoms": [[3.0, 4.0, 0.6], [5.0, 4.0, 0.6]],
  "solver": "newton-adaptive",
  "epsilon": 1e-9,
  "seed": 4
})";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "orthonewton_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strips the timestamp header lines and the elapsed_s column.
std::string stable_part(const std::string& csv) {
  std::stringstream in(csv), out;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# started", 0) == 0 || line.rfind("# finished", 0) == 0) continue;
    out << line.substr(0, line.rfind(',')) << '\n';
  }
  return out.str();
}

}  // namespace

TEST(ParseConfig, MinimalConfigGetsDefaults) {
  const auto cfg = on::parse_config(kMinimal);
  EXPECT_EQ(cfg.model, on::ModelKind::quadratic);
  EXPECT_EQ(cfg.n_g, 12);
  EXPECT_EQ(cfg.n, 3);
  EXPECT_EQ(cfg.solver, on::SolverKind::newton_backtracking);
  const auto& s = cfg.solver_config;
  EXPECT_EQ(s.eta, 1e-4);
  EXPECT_EQ(s.gamma2, 1e-4);
  EXPECT_EQ(s.q, 0.5);
  EXPECT_EQ(s.gamma1, 0.1);
  EXPECT_EQ(s.sigma, 0.4);
  EXPECT_EQ(s.inner_cap, 3);
  EXPECT_EQ(s.t_min, 1e-2);
  EXPECT_EQ(s.epsilon, 1e-12);
  EXPECT_EQ(s.sigma_mode, on::SigmaMode::fixed);
  EXPECT_EQ(s.retraction, on::RetractionKind::qr());
}

TEST(ParseConfig, EtaRangeDependsOnSolver) {
  const char* bt = R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "newton-bt",
    "eta": 0.3})";
  try {
    on::parse_config(bt);
    FAIL() << "expected ConfigError";
  } catch (const on::ConfigError& e) {
    EXPECT_EQ(e.field(), "eta");
    EXPECT_EQ(e.line(), 2);
  }
  const char* adaptive = R"({"model": "quadratic", "n_g": 12, "n": 3,
    "solver": "newton-adaptive", "eta": 0.3})";
  EXPECT_EQ(on::parse_config(adaptive).solver_config.eta, 0.3);
}

TEST(ParseConfig, UnknownKeyIsNamed) {
  const char* text = R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "newton-bt",
    "momentum": 0.9})";
  try {
    on::parse_config(text);
    FAIL() << "expected ConfigError";
  } catch (const on::ConfigError& e) {
    EXPECT_EQ(e.field(), "momentum");
    EXPECT_NE(std::string(e.what()).find("momentum"), std::string::npos);
  }
}

TEST(ParseConfig, SchemaViolations) {
  auto rejects = [](const char* text, const std::string& field) {
    try {
      on::parse_config(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const on::ConfigError& e) {
      EXPECT_EQ(e.field(), field) << text;
    }
  };
  rejects(R"({"model": "quadratic", "n_g": 12, "solver": "newton-bt"})", "n");
  rejects(R"({"model": "quadratic", "n_g": "12", "n": 3, "solver": "newton-bt"})", "n_g");
  rejects(R"({"model": "cubic", "n_g": 12, "n": 3, "solver": "newton-bt"})", "model");
  rejects(R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "bfgs"})", "solver");
  rejects(R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "gradient", "atoms": []})", "atoms");
  rejects(R"({"model": "ks1d", "n_g": 12, "n": 3, "solver": "gradient", "matrix_seed": 2})",
          "matrix_seed");
  rejects(R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "gradient", "retraction": "cayley"})",
          "retraction");
  rejects(R"({"model": "quadratic", "n_g": 12, "n": 3, "solver": "gradient", "seed": -1})", "seed");
  EXPECT_THROW(on::parse_config("{\"model\": "), on::ConfigError);
}

TEST(ParseConfig, KohnShamAndCustomRetraction) {
  const auto cfg = on::parse_config(kKs);
  EXPECT_EQ(cfg.model, on::ModelKind::ks1d);
  ASSERT_EQ(cfg.ks.atoms.size(), 2u);
  EXPECT_EQ(cfg.ks.atoms[1].position, 5.0);
  EXPECT_EQ(cfg.seed, 4u);
  const auto custom = on::parse_config(R"({"model": "quadratic", "n_g": 8, "n": 2,
    "solver": "gradient", "retraction": "ga-custom", "retraction_coefficients": [0.05, 0.01]})");
  EXPECT_EQ(custom.solver_config.retraction, on::RetractionKind::ga_custom({0.05, 0.01}));
}

TEST(DumpConfig, RoundTripsAndDigestIsStable) {
  for (const char* text : {kMinimal, kKs}) {
    const auto cfg = on::parse_config(text);
    const auto again = on::parse_config(on::dump_config(cfg));
    EXPECT_EQ(on::dump_config(again), on::dump_config(cfg));
    EXPECT_EQ(on::config_digest(again), on::config_digest(cfg));
    EXPECT_EQ(on::config_digest(cfg).size(), 16u);
  }
  auto cfg = on::parse_config(kMinimal);
  const auto digest = on::config_digest(cfg);
  cfg.seed = 99;
  EXPECT_NE(on::config_digest(cfg), digest);
}

TEST(ApplyOverrides, ReplacesFields) {
  auto cfg = on::parse_config(kMinimal);
  on::ConfigOverrides o;
  o.seed = 17;
  o.retraction = "pd";
  o.hessian = "exact";
  o.out_dir = "/tmp/runs";
  on::apply_overrides(cfg, o);
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.solver_config.retraction, on::RetractionKind::pd());
  EXPECT_EQ(cfg.solver_config.hessian_mode, on::HessianMode::exact);
  EXPECT_EQ(cfg.output, "/tmp/runs/newton-bt.csv");
  on::ConfigOverrides bad;
  bad.hessian = "diagonal";
  EXPECT_THROW(on::apply_overrides(cfg, bad), on::ConfigError);
}

TEST(InitialGuess, SeededAndOrthonormal) {
  const auto a = on::initial_guess(10, 3, 5);
  const auto b = on::initial_guess(10, 3, 5);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_NE(a.matrix(), on::initial_guess(10, 3, 6).matrix());
  EXPECT_LE(on::orthonormality_residual(a.matrix()), 1e-14);
  const auto s = on::random_symmetric(6, 1);
  EXPECT_EQ(s, s.transpose());
}

TEST(Csv, RoundTrip) {
  on::ConvergenceLog log;
  log.config_digest = "0123456789abcdef";
  log.solver = "newton-bt";
  log.model = "quadratic";
  log.initial_guess = "gaussian-qr seed=1";
  log.started = "2026-01-01T00:00:00Z";
  log.finished = "2026-01-01T00:00:01Z";
  log.status = on::SolveStatus::stalled;
  log.rows.push_back({0, -1.0 / 3.0, 0.1, 0.7, 0, 3, 0.0});
  log.rows.push_back({1, -0.4000000000000001, 1.0e-300, 0.0, 2, 0, 1.25e-3});
  std::stringstream buf;
  on::write_csv(log, buf);
  EXPECT_EQ(on::read_csv(buf), log);

  const auto path = scratch("roundtrip.csv");
  on::write_csv(log, path);
  EXPECT_EQ(on::read_csv(path), log);
}

TEST(Csv, RejectsMalformedInput) {
  const std::string header = "# status: CONVERGED\nn,energy,grad_norm,step,backtracks,inner_iters,elapsed_s\n";
  auto parse = [](const std::string& text) {
    std::stringstream in(text);
    return on::read_csv(in);
  };
  EXPECT_NO_THROW(parse(header + "0,1,1,0,0,0,0\n"));
  EXPECT_THROW(parse(header + "0,1,1,0,0,0\n"), on::InputError);
  EXPECT_THROW(parse(header + "1,1,1,0,0,0,0\n0,1,1,0,0,0,0\n"), on::InputError);
  EXPECT_THROW(parse(header + "0,x,1,0,0,0,0\n"), on::InputError);
  EXPECT_THROW(parse("n,energy\n"), on::InputError);
  EXPECT_THROW(parse("n,energy,grad_norm,step,backtracks,inner_iters,elapsed_s\n"), on::InputError);
}

TEST(RunExperiment, QuadraticConvergesAgainstEigenOracle) {
  auto cfg = on::parse_config(kMinimal);
  cfg.seed = 3;
  const auto run = on::run_experiment(cfg);
  EXPECT_EQ(run.log.status, on::SolveStatus::converged);
  EXPECT_LE(run.log.rows.back().grad_norm, 1e-12);
  const auto model = on::make_model(cfg);
  const auto& a = dynamic_cast<const on::QuadraticTraceModel&>(*model).matrix();
  EXPECT_LE(oracle::procrustes_distance(run.solve.point.matrix(), oracle::lowest_eigenvectors(a, 3)), 1e-8);
}

TEST(RunExperiment, DeterministicCsv) {
  auto cfg = on::parse_config(kKs);
  cfg.output = scratch("det_a.csv").string();
  on::run_experiment(cfg);
  const auto first = slurp(cfg.output);
  cfg.output = scratch("det_b.csv").string();
  const auto run = on::run_experiment(cfg);
  const auto second = slurp(cfg.output);
  // The digest covers the output path, so compare everything past that line.
  const auto a = stable_part(first), b = stable_part(second);
  EXPECT_EQ(a.substr(a.find("# solver")), b.substr(b.find("# solver")));
  EXPECT_EQ(run.log.status, on::SolveStatus::converged);
  const auto log = on::read_csv(fs::path(cfg.output));
  EXPECT_EQ(log.initial_guess, "gaussian-qr seed=4");
  for (std::size_t k = 1; k < log.rows.size(); ++k) {
    EXPECT_LE(log.rows[k].energy, log.rows[k - 1].energy + 1e-13);
  }
}

TEST(Compare, RunsEachSolverAndChecksInstances) {
  std::vector<on::ExperimentConfig> configs;
  for (const char* solver : {"gradient", "newton-bt", "newton-adaptive"}) {
    auto cfg = on::parse_config(kKs);
    cfg.solver = on::parse_solver_kind(solver);
    configs.push_back(cfg);
  }
  const auto summary = on::compare(configs);
  ASSERT_EQ(summary.rows.size(), 3u);
  for (const auto& row : summary.rows) {
    EXPECT_EQ(row.status, on::SolveStatus::converged) << row.solver;
    EXPECT_NEAR(row.energy, summary.rows[0].energy, 1e-8) << row.solver;
  }
  std::stringstream out;
  on::print_summary(summary, out);
  EXPECT_NE(out.str().find("newton-adaptive"), std::string::npos);

  EXPECT_THROW(on::compare({configs[0]}), on::ConfigError);
  auto other = configs[1];
  other.seed = 5;
  EXPECT_THROW(on::compare({configs[0], other}), on::ConfigError);
  auto quad = on::parse_config(kMinimal);
  EXPECT_THROW(on::compare({configs[0], quad}), on::ConfigError);
}
