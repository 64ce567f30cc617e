#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qdro/axioms.hpp"
#include "qdro/experiments.hpp"
#include "qdro/io.hpp"
#include "qdro/laplace.hpp"
#include "qdro/solver.hpp"

namespace {

using qdro::io::json;

enum Exit : int { kOk = 0, kInput = 1, kNoConvergence = 2, kCertification = 3, kRepro = 4 };

struct Options {
  std::string p_hat;
  std::optional<double> eps;
  std::string q;
  std::string instance_path;
  std::string output;
  std::string out_dir;
  std::string format;
  std::optional<int> max_iterations;
  bool no_symmetrize = false;
  std::optional<std::uint64_t> seed;
  std::string step_policy;
  std::optional<double> c;
  std::string x;
  std::string solution_path;
  std::string eps_grid;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qdro::Error(qdro::ErrorCode::IoFailure, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw qdro::Error(qdro::ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

json config_file(const Options& o) { return o.instance_path.empty() ? json::object() : read_json(o.instance_path); }

qdro::Distribution p_hat_from(const Options& o, const json& file) {
  if (!o.p_hat.empty()) return qdro::io::parse_distribution(o.p_hat);
  if (file.contains("p_hat")) return qdro::io::distribution_from_json(file.at("p_hat"));
  throw qdro::Error(qdro::ErrorCode::InvalidArgument, "--p-hat or an instance file with p_hat is required");
}

qdro::QExponent q_from(const Options& o, const json& file) {
  if (!o.q.empty()) return qdro::QExponent::parse(o.q);
  if (file.contains("q")) {
    const json& q = file.at("q");
    return q.is_string() ? qdro::QExponent::parse(q.get<std::string>()) : qdro::QExponent::finite(q.get<double>());
  }
  throw qdro::Error(qdro::ErrorCode::InvalidArgument, "--q or an instance file with q is required");
}

qdro::Instance instance_from(const Options& o, const json& file) {
  double eps = 0.0;
  if (o.eps) {
    eps = *o.eps;
  } else if (file.contains("epsilon")) {
    eps = file.at("epsilon").get<double>();
  } else {
    throw qdro::Error(qdro::ErrorCode::InvalidArgument, "--eps or an instance file with epsilon is required");
  }
  return qdro::Instance(p_hat_from(o, file), eps, q_from(o, file));
}

qdro::SolverSettings settings_from(const Options& o, const json& file) {
  qdro::SolverSettings s;
  s.max_iterations = o.max_iterations.value_or(file.value("max_iterations", s.max_iterations));
  s.symmetrize = o.no_symmetrize ? false : file.value("symmetrize", s.symmetrize);
  s.seed = o.seed.value_or(file.value("seed", s.seed));
  const std::string policy = o.step_policy.empty() ? file.value("step_policy", std::string("fixed")) : o.step_policy;
  if (policy == "fixed") {
    s.step_policy = qdro::StepPolicy::FixedBacktracking;
  } else if (policy == "diminishing") {
    s.step_policy = qdro::StepPolicy::Diminishing;
  } else {
    throw qdro::Error(qdro::ErrorCode::InvalidArgument, "step policy must be 'fixed' or 'diminishing'");
  }
  s.validate();
  return s;
}

std::string format_from(const Options& o, const json& file, const std::string& fallback) {
  if (!o.format.empty()) return o.format;
  return file.value("format", fallback);
}

std::string out_dir_from(const Options& o, const json& file) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (file.contains("out_dir")) return file.at("out_dir").get<std::string>();
  if (const char* env = std::getenv("QDRO_OUT_DIR"); env && *env) return env;
  return "results";
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary | std::ios::trunc);
  if (!out) throw qdro::Error(qdro::ErrorCode::IoFailure, "cannot open " + o.output);
  out << text;
}

std::optional<double> kkt_max(const qdro::Certificate& c) {
  return c.kkt ? std::optional<double>(c.kkt->max_residual) : std::nullopt;
}

int cmd_solve(const Options& o) {
  const json file = config_file(o);
  const qdro::Instance inst = instance_from(o, file);
  const qdro::Solution sol = qdro::solve_qdro(inst, settings_from(o, file));
  const qdro::Certificate cert = qdro::certify(sol, inst);
  emit(o, qdro::io::to_json(sol, kkt_max(cert), cert.duality_gap).dump(2) + "\n");
  if (sol.status == qdro::SolverStatus::MaxIterations) {
    std::cerr << "solver stopped at the iteration limit (" << sol.iterations << ")\n";
    return kNoConvergence;
  }
  return kOk;
}

int cmd_laplace(const Options& o) {
  const json file = config_file(o);
  const double c = o.c ? *o.c : file.value("c", 1.0);
  const qdro::Distribution x = qdro::laplace_smooth(p_hat_from(o, file), qdro::Pseudocount(c));
  if (format_from(o, file, "json") == "csv") {
    emit(o, qdro::io::csv_row(x.probs(), 12) + "\n");
  } else {
    emit(o, json{{"c", c}, {"x", qdro::io::to_json(x)}}.dump(2) + "\n");
  }
  return kOk;
}

int cmd_axioms(const Options& o) {
  const json file = config_file(o);
  const qdro::Distribution p_hat = p_hat_from(o, file);
  std::optional<qdro::Distribution> x;
  if (!o.x.empty()) {
    x = qdro::io::parse_distribution(o.x);
  } else if (file.contains("x")) {
    x = qdro::io::distribution_from_json(file.at("x"));
  } else {
    const qdro::Instance inst = instance_from(o, file);
    x = qdro::solve_qdro(inst, settings_from(o, file)).x;
  }
  const qdro::Tolerances tol;
  const qdro::AxiomReport report = qdro::check_axioms(p_hat, *x, tol.axiom_tol);
  if (format_from(o, file, "table") == "json") {
    emit(o, qdro::io::to_json(report).dump(2) + "\n");
  } else {
    emit(o, qdro::format_axiom_table(report));
  }
  return kOk;
}

int cmd_certify(const Options& o) {
  const json file = config_file(o);
  const qdro::Instance inst = instance_from(o, file);
  const qdro::Solution sol = o.solution_path.empty() ? qdro::solve_qdro(inst, settings_from(o, file))
                                                     : qdro::io::solution_from_json(read_json(o.solution_path));
  if (sol.x.size() != inst.size()) {
    throw qdro::Error(qdro::ErrorCode::InvalidArgument, "solution and instance differ in dimension");
  }
  const qdro::Certificate cert = qdro::certify(sol, inst);
  emit(o, qdro::io::to_json(cert).dump(2) + "\n");
  if (!cert.passed) {
    std::cerr << "certification failed: duality gap " << cert.duality_gap << ", optimality gap "
              << cert.optimality_gap;
    if (cert.kkt) std::cerr << ", KKT residual " << cert.kkt->max_residual;
    std::cerr << "\n";
    return kCertification;
  }
  return kOk;
}

int cmd_repro(const Options& o) {
  const json file = config_file(o);
  const std::string dir = out_dir_from(o, file);
  const qdro::ReproOutcome outcome =
      qdro::run_repro(settings_from(o, file), qdro::parse_formats(format_from(o, file, "all")), dir);
  for (const auto& check : outcome.checks) {
    std::cout << (check.pass ? "pass " : "FAIL ") << check.name << ": " << check.detail << "\n";
  }
  for (const auto& path : outcome.files) std::cout << "wrote " << path.string() << "\n";
  if (!outcome.passed()) {
    std::cerr << "golden checks failed:";
    for (const auto& check : outcome.checks) {
      if (!check.pass) std::cerr << " " << check.name;
    }
    std::cerr << "\n";
    return kRepro;
  }
  return kOk;
}

int cmd_sweep(const Options& o) {
  const json file = config_file(o);
  std::vector<double> grid = qdro::default_eps_grid();
  if (!o.eps_grid.empty()) {
    grid = qdro::io::parse_number_list(o.eps_grid);
  } else if (file.contains("eps_grid")) {
    grid = file.at("eps_grid").get<std::vector<double>>();
  }
  const qdro::SolverSettings settings = settings_from(o, file);
  const qdro::SweepResult r = qdro::run_sensitivity(p_hat_from(o, file), q_from(o, file), grid, settings);
  for (std::size_t k = 0; k < r.solutions.size(); ++k) {
    if (r.solutions[k].status == qdro::SolverStatus::MaxIterations) {
      std::cerr << "epsilon " << grid[k] << ": solver stopped at the iteration limit\n";
      return kNoConvergence;
    }
    if (!r.certificates[k].passed) {
      std::cerr << "epsilon " << grid[k] << ": certification failed, nothing written\n";
      return kCertification;
    }
  }
  const auto files = qdro::emit_sweep(r, qdro::parse_formats(format_from(o, file, "all")), out_dir_from(o, file));
  for (const auto& path : files) std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

void add_instance_flags(CLI::App* cmd, Options& o, bool with_eps = true) {
  cmd->add_option("--p-hat", o.p_hat, "empirical distribution, comma separated");
  if (with_eps) cmd->add_option("--eps", o.eps, "robustness radius (0 = passthrough)");
  cmd->add_option("--q", o.q, "norm exponent: a number >= 1 or 'inf'");
  cmd->add_option("--instance", o.instance_path, "JSON file {p_hat, epsilon, q, ...}; flags override it");
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--max-iterations", o.max_iterations, "iteration budget");
  cmd->add_flag("--no-symmetrize", o.no_symmetrize, "skip averaging over tied p_hat entries");
  cmd->add_option("--seed", o.seed, "seed for randomized components");
  cmd->add_option("--step-policy", o.step_policy, "fixed | diminishing");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-norm distributionally robust probability smoothing"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "solve one instance and print the solution JSON");
  add_instance_flags(solve, o);
  add_solver_flags(solve, o);
  solve->add_option("--output", o.output, "write to this file instead of stdout");

  auto* laplace = app.add_subcommand("laplace", "add-c smoothing");
  add_instance_flags(laplace, o, false);
  laplace->add_option("--c", o.c, "pseudocount (> 0)");
  laplace->add_option("--format", o.format, "json | csv");
  laplace->add_option("--output", o.output, "write to this file instead of stdout");

  auto* axioms = app.add_subcommand("axioms", "check the four axioms for a smoothed vector");
  add_instance_flags(axioms, o);
  add_solver_flags(axioms, o);
  axioms->add_option("--x", o.x, "smoothed distribution; solved from the instance when absent");
  axioms->add_option("--format", o.format, "table | json");
  axioms->add_option("--output", o.output, "write to this file instead of stdout");

  auto* certify = app.add_subcommand("certify", "KKT residuals, duality gap and Assumption-1 status");
  add_instance_flags(certify, o);
  add_solver_flags(certify, o);
  certify->add_option("--solution", o.solution_path, "solution JSON; solved from the instance when absent");
  certify->add_option("--output", o.output, "write to this file instead of stdout");

  auto* repro = app.add_subcommand("repro", "rerun the reference experiments and check the golden values");
  repro->add_option("--instance", o.instance_path, "JSON config with settings overrides");
  add_solver_flags(repro, o);
  repro->add_option("--out-dir", o.out_dir, "artifact directory (default $QDRO_OUT_DIR or ./results)");
  repro->add_option("--format", o.format, "any of json,csv,svg or all");

  auto* sweep = app.add_subcommand("sweep", "solve over a grid of radii");
  add_instance_flags(sweep, o, false);
  add_solver_flags(sweep, o);
  sweep->add_option("--eps-grid", o.eps_grid, "ascending radii, comma separated");
  sweep->add_option("--out-dir", o.out_dir, "artifact directory (default $QDRO_OUT_DIR or ./results)");
  sweep->add_option("--format", o.format, "any of json,csv,svg or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*laplace) return cmd_laplace(o);
    if (*axioms) return cmd_axioms(o);
    if (*certify) return cmd_certify(o);
    if (*repro) return cmd_repro(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const qdro::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == qdro::ErrorCode::MaxIterations ? kNoConvergence : kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
