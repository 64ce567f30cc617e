#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdro/axioms.hpp"
#include "qdro/core.hpp"
#include "qdro/solver.hpp"

namespace qdro {

/// n = 5, eps = 0.2, q = 2, p_hat = (0, 0.15, 0.15, 0.30, 0.40).
Instance experiment1_instance();
/// Golden optimum of the instance above (4 decimals).
std::vector<double> experiment1_expected();

struct Experiment1Result {
  Instance instance;
  Solution solution;
  AxiomReport axioms;
  Certificate certificate;
};

Experiment1Result run_experiment1(const SolverSettings& settings = {});

struct SweepResult {
  Distribution p_hat;
  QExponent q;
  std::vector<double> epsilon_grid;
  std::vector<Solution> solutions;
  std::vector<double> distances_to_uniform;    ///< 2-norm
  std::vector<double> distances_to_empirical;  ///< 2-norm
  std::vector<Certificate> certificates;
};

/// {0.00, 0.05, ..., 0.30}
std::vector<double> default_eps_grid();
/// (0.1, 0.2, 0.3, 0.4)
Distribution sensitivity_p_hat();

/// One certified solve per grid point; points run concurrently. The grid must
/// be ascending with nonnegative entries.
SweepResult run_sensitivity(const Distribution& p_hat, QExponent q, const std::vector<double>& eps_grid,
                            const SolverSettings& settings = {});

struct BoundaryCase {
  std::string name;
  Instance instance;
  Solution solution;
  AxiomReport axioms;
  std::vector<double> expected;  ///< golden values (2 decimals)
  double max_deviation = 0.0;    ///< ||x - expected||_inf
};

struct BoundaryReport {
  BoundaryCase q_one;
  BoundaryCase q_inf;
  /// q = 1: x_2 - x_1, reported without a sign assertion.
  double q_one_gap_21 = 0.0;
  /// q = inf: -log x_2 - beta and -log x_3 - beta.
  double q_inf_residual_2 = 0.0;
  double q_inf_residual_3 = 0.0;
};

BoundaryReport run_boundary_cases(const SolverSettings& settings = {});

struct GoldenCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<GoldenCheck> experiment1_checks(const Experiment1Result& r);
std::vector<GoldenCheck> sweep_checks(const SweepResult& r, double cert_tol);
std::vector<GoldenCheck> boundary_checks(const BoundaryReport& r, double cert_tol);

struct ReportFormats {
  bool json = true;
  bool csv = true;
  bool svg = true;
};

/// Parses "json,csv,svg" (any subset, or "all").
ReportFormats parse_formats(const std::string& text);

/// Writers return the paths written. Floats are printed with 6 decimals, so
/// identical inputs give byte-identical files. Throws IoFailure.
std::vector<std::filesystem::path> emit_experiment1(const Experiment1Result& r, const ReportFormats& formats,
                                                    const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_sweep(const SweepResult& r, const ReportFormats& formats,
                                              const std::filesystem::path& dir);
/// No SVG for the boundary cases.
std::vector<std::filesystem::path> emit_boundary(const BoundaryReport& r, const ReportFormats& formats,
                                                 const std::filesystem::path& dir);

std::string experiment1_svg(const Experiment1Result& r);
std::string sweep_svg(const SweepResult& r);
std::string sweep_csv(const SweepResult& r);

struct ReproOutcome {
  std::vector<GoldenCheck> checks;
  std::vector<std::filesystem::path> files;
  bool passed() const;
};

/// Runs experiment 1, the default sensitivity sweep and both boundary cases,
/// writes their artifacts to dir and evaluates the golden checks.
ReproOutcome run_repro(const SolverSettings& settings, const ReportFormats& formats,
                       const std::filesystem::path& dir);

}  // namespace qdro
