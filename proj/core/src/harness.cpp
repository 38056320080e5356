#include "orthonewton/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orthonewton/errors.hpp"

namespace orthonewton {

namespace {

using nlohmann::json;

// Line of the first occurrence of "key" in the text, 0 if absent.
long line_of_key(std::string_view text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  Reader(const json& root, std::string_view text) : root_(root), text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const long line = line_of_key(text_, key);
    std::string what = "config: " + message;
    if (line > 0) what += " (line " + std::to_string(line) + ")";
    throw ConfigError(what, key, line);
  }

  bool has(const std::string& key) const { return root_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    const json& v = root_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "'" + key + "' must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "'" + key + "' must be a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "'" + key + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          fail(key, "'" + key + "' must be non-negative");
        }
      }
    } else {
      if (!v.is_number()) fail(key, "'" + key + "' must be a number");
    }
    return v.get<T>();
  }

  template <typename T>
  T require(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key '" + key + "'");
    return get<T>(key, T{});
  }

  const json& at(const std::string& key) const { return root_.at(key); }

 private:
  const json& root_;
  std::string_view text_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "model",   "n_g",          "n",          "matrix",         "matrix_seed",
      "box_length", "atoms",     "c_x",        "density_floor",  "hartree",
      "solver",  "epsilon",      "q",          "eta",            "gamma1",
      "gamma2",  "sigma",        "sigma_mode", "inner_cap",      "t_min",
      "alpha",   "max_outer",    "max_backtracks", "retraction", "retraction_coefficients",
      "hessian", "seed",         "output"};
  return keys;
}

ModelKind parse_model(const std::string& s, const Reader& r) {
  if (s == "quadratic") return ModelKind::quadratic;
  if (s == "ks1d") return ModelKind::ks1d;
  r.fail("model", "unknown model '" + s + "' (expected quadratic or ks1d)");
}

std::string model_name(ModelKind m) { return m == ModelKind::quadratic ? "quadratic" : "ks1d"; }

HessianMode parse_hessian(const std::string& s) {
  if (s == "exact") return HessianMode::exact;
  if (s == "approx") return HessianMode::approx;
  throw ConfigError("unknown hessian mode '" + s + "' (expected exact or approx)", "hessian");
}

std::string hessian_name(HessianMode m) { return m == HessianMode::exact ? "exact" : "approx"; }

// Re-raises a ConfigError from a nested parser with the line of its field.
template <typename F>
auto with_line(const Reader& r, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    r.fail(key, std::string(e.what()));
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("csv: bad number '" + s + "'");
  }
  if (used != s.size()) throw InputError("csv: bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw InputError("csv: bad integer '" + s + "'");
  }
  if (used != s.size()) throw InputError("csv: bad integer '" + s + "'");
  return v;
}

constexpr const char* kColumns = "n,energy,grad_norm,step,backtracks,inner_iters,elapsed_s";

// Everything that defines the problem instance, excluding solver settings.
json instance_key(const ExperimentConfig& cfg) {
  json j = json::parse(dump_config(cfg));
  for (const char* key : {"solver", "epsilon", "q", "eta", "gamma1", "gamma2", "sigma",
                          "sigma_mode", "inner_cap", "t_min", "alpha", "max_outer",
                          "max_backtracks", "retraction", "retraction_coefficients", "hessian",
                          "output"}) {
    j.erase(key);
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    const long offset = static_cast<long>(e.byte);
    const long line =
        1 + static_cast<long>(std::count(text.begin(),
                                         text.begin() + std::min<long>(offset, static_cast<long>(text.size())),
                                         '\n'));
    throw ConfigError("config: malformed JSON at line " + std::to_string(line) + ": " + e.what(),
                      "", line);
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  const Reader r(root, text);

  for (const auto& item : root.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      r.fail(item.key(), "unknown key '" + item.key() + "'");
    }
  }

  ExperimentConfig cfg;
  cfg.model = parse_model(r.require<std::string>("model"), r);
  cfg.n_g = r.require<long>("n_g");
  cfg.n = r.require<long>("n");
  if (cfg.n_g < 2) r.fail("n_g", "'n_g' must be at least 2");
  if (cfg.n < 1 || cfg.n >= cfg.n_g) r.fail("n", "'n' must lie in [1, n_g)");

  const bool quadratic = cfg.model == ModelKind::quadratic;
  auto forbid = [&](const char* key) {
    if (r.has(key)) r.fail(key, std::string("'") + key + "' does not apply to model " + model_name(cfg.model));
  };
  if (quadratic) {
    for (const char* key : {"box_length", "atoms", "c_x", "density_floor", "hartree"}) forbid(key);
    const auto m = r.get<std::string>("matrix", "random");
    if (m == "random") {
      cfg.matrix = MatrixKind::random;
    } else if (m == "diagonal") {
      cfg.matrix = MatrixKind::diagonal;
    } else {
      r.fail("matrix", "unknown matrix '" + m + "' (expected random or diagonal)");
    }
    cfg.matrix_seed = r.get<std::uint64_t>("matrix_seed", 0);
  } else {
    for (const char* key : {"matrix", "matrix_seed"}) forbid(key);
    cfg.ks.grid_points = cfg.n_g;
    cfg.ks.orbitals = cfg.n;
    cfg.ks.box_length = r.get<double>("box_length", cfg.ks.box_length);
    cfg.ks.exchange_constant = r.get<double>("c_x", cfg.ks.exchange_constant);
    cfg.ks.density_floor = r.get<double>("density_floor", cfg.ks.density_floor);
    cfg.ks.hartree = r.get<bool>("hartree", cfg.ks.hartree);
    if (!(cfg.ks.box_length > 0.0)) r.fail("box_length", "'box_length' must be positive");
    if (!(cfg.ks.exchange_constant >= 0.0)) r.fail("c_x", "'c_x' must be non-negative");
    if (!(cfg.ks.density_floor > 0.0)) r.fail("density_floor", "'density_floor' must be positive");
    if (r.has("atoms")) {
      const json& atoms = r.at("atoms");
      if (!atoms.is_array()) r.fail("atoms", "'atoms' must be an array of [position, depth, width]");
      for (const json& a : atoms) {
        if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
            !a[2].is_number()) {
          r.fail("atoms", "each atom must be [position, depth, width]");
        }
        Atom atom{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
        if (!(atom.width > 0.0)) r.fail("atoms", "atom width must be positive");
        cfg.ks.atoms.push_back(atom);
      }
    }
  }

  cfg.solver = with_line(r, "solver", [&] { return parse_solver_kind(r.require<std::string>("solver")); });
  SolverConfig& s = cfg.solver_config;
  s.epsilon = r.get<double>("epsilon", s.epsilon);
  s.q = r.get<double>("q", s.q);
  s.eta = r.get<double>("eta", s.eta);
  s.gamma1 = r.get<double>("gamma1", s.gamma1);
  s.gamma2 = r.get<double>("gamma2", s.gamma2);
  s.sigma = r.get<double>("sigma", s.sigma);
  const auto mode = r.get<std::string>("sigma_mode", "fixed");
  if (mode == "fixed") {
    s.sigma_mode = SigmaMode::fixed;
  } else if (mode == "residual_scaled") {
    s.sigma_mode = SigmaMode::residual_scaled;
  } else {
    r.fail("sigma_mode", "unknown sigma_mode '" + mode + "' (expected fixed or residual_scaled)");
  }
  s.inner_cap = r.get<int>("inner_cap", s.inner_cap);
  s.t_min = r.get<double>("t_min", s.t_min);
  s.alpha = r.get<double>("alpha", s.alpha);
  s.max_outer = r.get<int>("max_outer", s.max_outer);
  s.max_backtracks = r.get<int>("max_backtracks", s.max_backtracks);

  const auto retraction = r.get<std::string>("retraction", "qr");
  if (retraction == "ga-custom") {
    if (!r.has("retraction_coefficients")) {
      r.fail("retraction", "'ga-custom' needs 'retraction_coefficients'");
    }
    const json& c = r.at("retraction_coefficients");
    if (!c.is_array()) r.fail("retraction_coefficients", "'retraction_coefficients' must be an array");
    std::vector<double> coefs;
    for (const json& x : c) {
      if (!x.is_number()) r.fail("retraction_coefficients", "coefficients must be numbers");
      coefs.push_back(x.get<double>());
    }
    s.retraction = with_line(r, "retraction_coefficients",
                             [&] { return RetractionKind::ga_custom(coefs); });
  } else {
    if (r.has("retraction_coefficients")) {
      r.fail("retraction_coefficients", "'retraction_coefficients' requires retraction 'ga-custom'");
    }
    s.retraction = with_line(r, "retraction", [&] { return RetractionKind::parse(retraction); });
  }
  s.hessian_mode = with_line(r, "hessian", [&] { return parse_hessian(r.get<std::string>("hessian", "approx")); });

  cfg.seed = r.get<std::uint64_t>("seed", 0);
  cfg.output = r.get<std::string>("output", "");

  try {
    s.validate(cfg.solver);
  } catch (const ConfigError& e) {
    r.fail(e.field(), std::string(e.what()));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  const SolverConfig& s = cfg.solver_config;
  json j;
  j["model"] = model_name(cfg.model);
  j["n_g"] = cfg.n_g;
  j["n"] = cfg.n;
  if (cfg.model == ModelKind::quadratic) {
    j["matrix"] = cfg.matrix == MatrixKind::random ? "random" : "diagonal";
    j["matrix_seed"] = cfg.matrix_seed;
  } else {
    j["box_length"] = cfg.ks.box_length;
    json atoms = json::array();
    for (const Atom& a : cfg.ks.atoms) atoms.push_back({a.position, a.depth, a.width});
    j["atoms"] = atoms;
    j["c_x"] = cfg.ks.exchange_constant;
    j["density_floor"] = cfg.ks.density_floor;
    j["hartree"] = cfg.ks.hartree;
  }
  j["solver"] = to_string(cfg.solver);
  j["epsilon"] = s.epsilon;
  j["q"] = s.q;
  j["eta"] = s.eta;
  j["gamma1"] = s.gamma1;
  j["gamma2"] = s.gamma2;
  j["sigma"] = s.sigma;
  j["sigma_mode"] = s.sigma_mode == SigmaMode::fixed ? "fixed" : "residual_scaled";
  j["inner_cap"] = s.inner_cap;
  j["t_min"] = s.t_min;
  j["alpha"] = s.alpha;
  j["max_outer"] = s.max_outer;
  j["max_backtracks"] = s.max_backtracks;
  j["retraction"] = s.retraction.name();
  if (s.retraction.family() == RetractionFamily::ga_custom) {
    j["retraction_coefficients"] = s.retraction.coefficients();
  }
  j["hessian"] = hessian_name(s.hessian_mode);
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  return j.dump(2);
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : dump_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.retraction) cfg.solver_config.retraction = RetractionKind::parse(*o.retraction);
  if (o.hessian) cfg.solver_config.hessian_mode = parse_hessian(*o.hessian);
  if (o.out_dir) {
    const std::string file = cfg.output.empty()
                                 ? to_string(cfg.solver) + ".csv"
                                 : std::filesystem::path(cfg.output).filename().string();
    cfg.output = (*o.out_dir / file).string();
  }
}

Matrix random_symmetric(Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(size, size);
  for (Index j = 0; j < size; ++j) {
    for (Index i = 0; i < size; ++i) g(i, j) = normal(rng);
  }
  return 0.5 * (g + g.transpose());
}

StiefelPoint initial_guess(Index n_g, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(n_g, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n_g; ++i) g(i, j) = normal(rng);
  }
  return StiefelPoint::orthonormalized(g);
}

std::unique_ptr<EnergyModel> make_model(const ExperimentConfig& cfg) {
  if (cfg.model == ModelKind::quadratic) {
    Matrix a = cfg.matrix == MatrixKind::random
                   ? random_symmetric(cfg.n_g, cfg.matrix_seed)
                   : Matrix(Vector::LinSpaced(cfg.n_g, 1.0, static_cast<double>(cfg.n_g)).asDiagonal());
    return std::make_unique<QuadraticTraceModel>(std::move(a), cfg.n);
  }
  KohnSham1DParams p = cfg.ks;
  p.grid_points = cfg.n_g;
  p.orbitals = cfg.n;
  return std::make_unique<KohnSham1D>(std::move(p));
}

// ---------------------------------------------------------------------------

void write_csv(const ConvergenceLog& log, std::ostream& out) {
  out << "# orthonewton convergence log\n"
      << "# config_digest: " << log.config_digest << '\n'
      << "# solver: " << log.solver << '\n'
      << "# model: " << log.model << '\n'
      << "# initial_guess: " << log.initial_guess << '\n'
      << "# started: " << log.started << '\n'
      << "# finished: " << log.finished << '\n'
      << "# status: " << to_string(log.status) << '\n'
      << kColumns << '\n';
  for (const IterationRecord& r : log.rows) {
    out << r.index << ',' << format_real(r.energy) << ',' << format_real(r.grad_norm) << ','
        << format_real(r.step) << ',' << r.backtracks << ',' << r.inner_iters << ','
        << format_real(r.elapsed_s) << '\n';
  }
}

void write_csv(const ConvergenceLog& log, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("csv: cannot write " + path.string());
  write_csv(log, out);
  if (!out) throw InputError("csv: write failed for " + path.string());
}

ConvergenceLog read_csv(std::istream& in) {
  ConvergenceLog log;
  std::string line;
  bool saw_columns = false;
  bool saw_status = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "config_digest") log.config_digest = value;
      else if (key == "solver") log.solver = value;
      else if (key == "model") log.model = value;
      else if (key == "initial_guess") log.initial_guess = value;
      else if (key == "started") log.started = value;
      else if (key == "finished") log.finished = value;
      else if (key == "status") {
        log.status = parse_solve_status(value);
        saw_status = true;
      }
      continue;
    }
    if (!saw_columns) {
      if (line != kColumns) throw InputError("csv: unexpected column header '" + line + "'");
      saw_columns = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 7) throw InputError("csv: expected 7 fields in '" + line + "'");
    IterationRecord r;
    r.index = parse_int(fields[0]);
    r.energy = parse_real(fields[1]);
    r.grad_norm = parse_real(fields[2]);
    r.step = parse_real(fields[3]);
    r.backtracks = parse_int(fields[4]);
    r.inner_iters = parse_int(fields[5]);
    r.elapsed_s = parse_real(fields[6]);
    if (!log.rows.empty() && r.index <= log.rows.back().index) {
      throw InputError("csv: row indices must be strictly increasing");
    }
    log.rows.push_back(r);
  }
  if (!saw_columns) throw InputError("csv: missing column header");
  if (!saw_status) throw InputError("csv: missing status header");
  return log;
}

ConvergenceLog read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("csv: cannot open " + path.string());
  return read_csv(in);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const StepObserver& observer) {
  cfg.solver_config.validate(cfg.solver);
  const auto model = make_model(cfg);
  const StiefelPoint u0 = initial_guess(cfg.n_g, cfg.n, cfg.seed);

  ConvergenceLog log;
  log.config_digest = config_digest(cfg);
  log.solver = to_string(cfg.solver);
  log.model = model->name();
  log.initial_guess = "gaussian-qr seed=" + std::to_string(cfg.seed);
  log.started = utc_now();
  SolveResult result = solve(cfg.solver, *model, u0, cfg.solver_config, observer);
  log.finished = utc_now();
  log.status = result.status;
  log.rows = result.records;

  if (!cfg.output.empty()) write_csv(log, std::filesystem::path(cfg.output));
  return {cfg, std::move(log), std::move(result)};
}

CompareSummary compare(const std::vector<ExperimentConfig>& configs, const StepObserver& observer) {
  if (configs.size() < 2) throw ConfigError("compare: need at least two configs");
  const json reference = instance_key(configs.front());
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (instance_key(configs[i]) != reference) {
      throw ConfigError("compare: config " + std::to_string(i + 1) +
                        " does not describe the same model and seed as config 1");
    }
  }
  CompareSummary summary;
  for (const ExperimentConfig& cfg : configs) {
    ExperimentResult run = run_experiment(cfg, observer);
    const IterationRecord& last = run.log.rows.back();
    summary.rows.push_back({run.log.solver, last.energy, run.solve.iterations(), last.grad_norm,
                            last.elapsed_s, run.log.status});
    summary.runs.push_back(std::move(run));
  }
  return summary;
}

void print_summary(const CompareSummary& summary, std::ostream& out) {
  out << std::left << std::setw(18) << "algorithm" << std::setw(26) << "energy" << std::setw(8)
      << "iter" << std::setw(14) << "grad_norm" << std::setw(12) << "time_s"
      << "status\n";
  for (const CompareRow& r : summary.rows) {
    char energy[40], grad[24], time[24];
    std::snprintf(energy, sizeof energy, "%.16e", r.energy);
    std::snprintf(grad, sizeof grad, "%.3e", r.grad_norm);
    std::snprintf(time, sizeof time, "%.3f", r.elapsed_s);
    out << std::left << std::setw(18) << r.solver << std::setw(26) << energy << std::setw(8)
        << r.iterations << std::setw(14) << grad << std::setw(12) << time << to_string(r.status)
        << '\n';
  }
}

}  // namespace orthonewton
