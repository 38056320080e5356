#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orthonewton/solvers.hpp"

namespace orthonewton {

enum class ModelKind { quadratic, ks1d };

/// Spectrum of the quadratic model: a seeded GOE matrix or diag(1, ..., n_g).
enum class MatrixKind { random, diagonal };

struct ExperimentConfig {
  ModelKind model = ModelKind::quadratic;
  Index n_g = 0;
  Index n = 0;

  // quadratic
  MatrixKind matrix = MatrixKind::random;
  std::uint64_t matrix_seed = 0;

  // ks1d
  KohnSham1DParams ks;

  SolverKind solver = SolverKind::newton_backtracking;
  SolverConfig solver_config;
  std::uint64_t seed = 0;  // initial guess
  std::string output;      // CSV path; empty disables writing
};

/// Parses the JSON-shaped config text. Unknown keys, wrong types and out of
/// range values raise ConfigError carrying the key and its line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering of every field; parse_config accepts it back.
std::string dump_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of dump_config, as 16 hex digits.
std::string config_digest(const ExperimentConfig& cfg);

/// Command-line overrides applied on top of a parsed config.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> retraction;
  std::optional<std::string> hessian;
  std::optional<std::filesystem::path> out_dir;
};

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& overrides);

std::unique_ptr<EnergyModel> make_model(const ExperimentConfig& cfg);

/// Symmetric (G + G^T) / 2 with G standard normal from the given seed.
Matrix random_symmetric(Index size, std::uint64_t seed);

/// qr_positive of a seeded standard normal n_g x n matrix.
StiefelPoint initial_guess(Index n_g, Index n, std::uint64_t seed);

struct ConvergenceLog {
  std::string config_digest;
  std::string solver;
  std::string model;
  std::string initial_guess;
  std::string started;   // UTC, ISO 8601
  std::string finished;  // UTC, ISO 8601
  SolveStatus status = SolveStatus::max_iter;
  std::vector<IterationRecord> rows;

  friend bool operator==(const ConvergenceLog&, const ConvergenceLog&) = default;
};

void write_csv(const ConvergenceLog& log, std::ostream& out);
void write_csv(const ConvergenceLog& log, const std::filesystem::path& path);
/// Throws InputError on malformed input.
ConvergenceLog read_csv(std::istream& in);
ConvergenceLog read_csv(const std::filesystem::path& path);

struct ExperimentResult {
  ExperimentConfig config;
  ConvergenceLog log;
  SolveResult solve;
};

/// Builds the model, seeds U0, runs the solver and writes the CSV log when
/// cfg.output is set (also when the run stalls).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const StepObserver& observer = {});

struct CompareRow {
  std::string solver;
  double energy = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  double elapsed_s = 0.0;
  SolveStatus status = SolveStatus::max_iter;
};

struct CompareSummary {
  std::vector<CompareRow> rows;
  std::vector<ExperimentResult> runs;
};

/// Runs at least two configs that differ only in solver settings and
/// summarizes them. Throws ConfigError if the models or seeds differ.
CompareSummary compare(const std::vector<ExperimentConfig>& configs,
                       const StepObserver& observer = {});

void print_summary(const CompareSummary& summary, std::ostream& out);

}  // namespace orthonewton
