#include "qdro/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdro/io.hpp"
#include "qdro/norms.hpp"

namespace qdro {

namespace {

using io::fixed;
using io::json;

double distance2(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
  return q_norm(d, QExponent::finite(2.0));
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

json solution_json(const Solution& sol) { return io::to_json(sol, std::nullopt, std::nullopt); }

// Categorical palette; wraps for n > 8.
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 130.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

double nice_top(double v) { return std::max(0.1, std::ceil(v * 10.0 - 1e-9) / 10.0); }

void svg_open(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
      << fixed(kHeight, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(kWidth / 2, 1) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
}

// Y axis from 0 to top with gridlines every 0.05 or 0.1.
void svg_y_axis(std::ostringstream& out, double top, const std::string& label) {
  const double plot_h = kHeight - kTop - kBottom;
  const double step = top > 0.3 ? 0.1 : 0.05;
  for (int k = 0; k * step <= top + 1e-9; ++k) {
    const double v = k * step;
    const double y = kTop + plot_h * (1.0 - v / top);
    out << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\""
        << fixed(kWidth - kRight, 1) << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fixed(kLeft - 6, 1) << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
        << fixed(v, 2) << "</text>\n";
  }
  out << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(kTop, 1) << "\" x2=\"" << fixed(kLeft, 1)
      << "\" y2=\"" << fixed(kHeight - kBottom, 1) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(kHeight - kBottom, 1) << "\" x2=\""
      << fixed(kWidth - kRight, 1) << "\" y2=\"" << fixed(kHeight - kBottom, 1) << "\" stroke=\"black\"/>\n";
  const double cy = kTop + plot_h / 2;
  out << "<text x=\"16\" y=\"" << fixed(cy, 1) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(cy, 1) << ")\">" << label << "</text>\n";
}

void svg_legend(std::ostringstream& out, std::size_t index, const std::string& color, const std::string& text) {
  const double x = kWidth - kRight + 15;
  const double y = kTop + 10 + 20.0 * static_cast<double>(index);
  out << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y - 9, 1) << "\" width=\"12\" height=\"12\" fill=\""
      << color << "\"/>\n";
  out << "<text x=\"" << fixed(x + 18, 1) << "\" y=\"" << fixed(y + 1, 1) << "\">" << text << "</text>\n";
}

BoundaryCase solve_case(std::string name, Instance inst, std::vector<double> expected,
                        const SolverSettings& settings) {
  Solution sol = solve_qdro(inst, settings);
  AxiomReport axioms = check_axioms(inst.p_hat, sol.x, settings.tolerances.axiom_tol);
  const double dev = max_abs_diff(sol.x.probs(), expected);
  return BoundaryCase{.name = std::move(name),
                      .instance = std::move(inst),
                      .solution = std::move(sol),
                      .axioms = std::move(axioms),
                      .expected = std::move(expected),
                      .max_deviation = dev};
}

json case_json(const BoundaryCase& c) {
  return json{{"name", c.name},
              {"instance", io::to_json(c.instance)},
              {"solution", solution_json(c.solution)},
              {"expected", c.expected},
              {"max_deviation", c.max_deviation},
              {"axioms", io::to_json(c.axioms)}};
}

}  // namespace

Instance experiment1_instance() {
  return Instance(Distribution::validate(std::vector<double>{0.0, 0.15, 0.15, 0.30, 0.40}), 0.2,
                  QExponent::finite(2.0));
}

std::vector<double> experiment1_expected() { return {0.1342, 0.1792, 0.1792, 0.2332, 0.2742}; }

Experiment1Result run_experiment1(const SolverSettings& settings) {
  Instance inst = experiment1_instance();
  Solution sol = solve_qdro(inst, settings);
  AxiomReport axioms = check_axioms(inst.p_hat, sol.x, settings.tolerances.axiom_tol);
  Certificate cert = certify(sol, inst, settings.tolerances);
  return Experiment1Result{.instance = std::move(inst),
                           .solution = std::move(sol),
                           .axioms = std::move(axioms),
                           .certificate = std::move(cert)};
}

std::vector<double> default_eps_grid() { return {0.00, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30}; }

Distribution sensitivity_p_hat() { return Distribution::validate(std::vector<double>{0.1, 0.2, 0.3, 0.4}); }

SweepResult run_sensitivity(const Distribution& p_hat, QExponent q, const std::vector<double>& eps_grid,
                            const SolverSettings& settings) {
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] >= 0.0) || !std::isfinite(eps_grid[k])) {
      throw Error(ErrorCode::InvalidRadius, "grid values must be finite and nonnegative");
    }
    if (k > 0 && eps_grid[k] < eps_grid[k - 1]) {
      throw Error(ErrorCode::InvalidArgument, "epsilon grid must be ascending");
    }
  }
  std::vector<Instance> instances;
  instances.reserve(eps_grid.size());
  for (double eps : eps_grid) instances.emplace_back(p_hat, eps, q);

  SweepResult r{.p_hat = p_hat, .q = q, .epsilon_grid = eps_grid, .solutions = solve_batch(instances, settings)};
  const Distribution u = Distribution::uniform(p_hat.size());
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const Solution& sol = r.solutions[k];
    r.distances_to_uniform.push_back(distance2(sol.x.probs(), u.probs()));
    r.distances_to_empirical.push_back(distance2(sol.x.probs(), p_hat.probs()));
    r.certificates.push_back(certify(sol, instances[k], settings.tolerances));
  }
  return r;
}

BoundaryReport run_boundary_cases(const SolverSettings& settings) {
  BoundaryCase one = solve_case(
      "q=1",
      Instance(Distribution::validate(std::vector<double>{0.0, 0.07, 0.465, 0.465}), 0.3, QExponent::finite(1.0)),
      {0.11, 0.11, 0.39, 0.39}, settings);
  BoundaryCase inf = solve_case(
      "q=inf", Instance(Distribution::validate(std::vector<double>{0.0, 0.2, 0.3, 0.5}), 0.2, QExponent::infinity()),
      {0.20, 0.25, 0.25, 0.30}, settings);
  BoundaryReport r{.q_one = std::move(one), .q_inf = std::move(inf)};
  const auto& x1 = r.q_one.solution.x;
  const auto& xi = r.q_inf.solution.x;
  const double beta = r.q_inf.solution.beta;
  r.q_one_gap_21 = x1[1] - x1[0];
  r.q_inf_residual_2 = -safe_log(xi[1]) - beta;
  r.q_inf_residual_3 = -safe_log(xi[2]) - beta;
  return r;
}

std::vector<GoldenCheck> experiment1_checks(const Experiment1Result& r) {
  std::vector<GoldenCheck> out;
  const double dev = max_abs_diff(r.solution.x.probs(), experiment1_expected());
  out.push_back({"experiment1.converged", r.solution.status == SolverStatus::Converged,
                 std::string("status ") + to_string(r.solution.status)});
  out.push_back({"experiment1.x_within_1e-3", dev <= 1e-3, "max deviation " + sci(dev)});
  out.push_back({"experiment1.positivity", r.axioms.positivity.pass, "min x " + fixed(r.axioms.positivity.min_component)});
  const bool pair23 = r.axioms.symmetry.pairs_checked == 1 && r.axioms.symmetry.worst &&
                      r.axioms.symmetry.worst->i == 1 && r.axioms.symmetry.worst->j == 2;
  out.push_back({"experiment1.symmetry", r.axioms.symmetry.pass && pair23,
                 "pairs " + std::to_string(r.axioms.symmetry.pairs_checked)});
  out.push_back({"experiment1.order_preservation", r.axioms.order_preservation.pass,
                 "ties " + std::to_string(r.axioms.order_preservation.ties) + ", inversions " +
                     std::to_string(r.axioms.order_preservation.inversions)});
  out.push_back({"experiment1.duality_gap", std::abs(r.certificate.duality_gap) <= 1e-4,
                 "gap " + sci(r.certificate.duality_gap)});
  out.push_back({"experiment1.certified", r.certificate.passed,
                 "optimality gap " + sci(r.certificate.optimality_gap)});
  return out;
}

std::vector<GoldenCheck> sweep_checks(const SweepResult& r, double cert_tol) {
  std::vector<GoldenCheck> out;
  bool converged = true;
  bool certified = true;
  for (std::size_t k = 0; k < r.solutions.size(); ++k) {
    converged = converged && r.solutions[k].status != SolverStatus::MaxIterations;
    certified = certified && r.certificates[k].passed;
  }
  out.push_back({"sweep.converged", converged, std::to_string(r.solutions.size()) + " points"});
  out.push_back({"sweep.certified", certified, "every point certified"});
  if (!r.epsilon_grid.empty() && r.epsilon_grid.front() == 0.0) {
    const bool exact = r.solutions.front().x == r.p_hat;
    out.push_back({"sweep.eps0_passthrough", exact, exact ? "x == p_hat" : "x differs from p_hat"});
  }
  if (!r.solutions.empty()) {
    const double d = r.distances_to_uniform.back();
    out.push_back({"sweep.endpoint_uniform", d <= 1e-3, "distance to uniform " + sci(d)});
  }
  bool monotone = true;
  for (std::size_t k = 1; k < r.distances_to_uniform.size(); ++k) {
    monotone = monotone && r.distances_to_uniform[k] <= r.distances_to_uniform[k - 1] + cert_tol;
  }
  out.push_back({"sweep.monotone_to_uniform", monotone, "distances to uniform nonincreasing"});
  return out;
}

std::vector<GoldenCheck> boundary_checks(const BoundaryReport& r, double cert_tol) {
  std::vector<GoldenCheck> out;
  const auto& one = r.q_one;
  const auto& inf = r.q_inf;
  out.push_back({"boundary.q1.converged", one.solution.status != SolverStatus::MaxIterations,
                 std::string("status ") + to_string(one.solution.status)});
  out.push_back({"boundary.q1.x_within_1e-2", one.max_deviation <= 1e-2, "max deviation " + sci(one.max_deviation)});
  out.push_back({"boundary.qinf.converged", inf.solution.status != SolverStatus::MaxIterations,
                 std::string("status ") + to_string(inf.solution.status)});
  out.push_back({"boundary.qinf.x_within_1e-2", inf.max_deviation <= 1e-2, "max deviation " + sci(inf.max_deviation)});
  const double tie = std::abs(inf.solution.x[1] - inf.solution.x[2]);
  out.push_back({"boundary.qinf.x2_eq_x3", tie <= 1e-6, "|x2 - x3| " + sci(tie)});
  const auto& op = inf.axioms.order_preservation;
  const bool tie_23 = op.worst_tie && op.worst_tie->i == 1 && op.worst_tie->j == 2;
  out.push_back({"boundary.qinf.order_tie", !op.pass && op.ties > 0 && tie_23,
                 "ties " + std::to_string(op.ties)});
  const bool diag = std::abs(r.q_inf_residual_2) <= cert_tol && std::abs(r.q_inf_residual_3) <= cert_tol;
  out.push_back({"boundary.qinf.baseline_diagnostic", diag,
                 "residuals " + sci(r.q_inf_residual_2) + ", " + sci(r.q_inf_residual_3)});
  return out;
}

ReportFormats parse_formats(const std::string& text) {
  ReportFormats f{false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "json") f.json = true;
    else if (item == "csv") f.csv = true;
    else if (item == "svg") f.svg = true;
    else if (item == "all") f = ReportFormats{};
    else throw Error(ErrorCode::InvalidArgument, "unknown format '" + item + "'");
  }
  if (!f.json && !f.csv && !f.svg) throw Error(ErrorCode::InvalidArgument, "no output format selected");
  return f;
}

std::string experiment1_svg(const Experiment1Result& r) {
  const auto& p = r.instance.p_hat;
  const auto& x = r.solution.x;
  const std::size_t n = p.size();
  double top = 0.0;
  for (std::size_t j = 0; j < n; ++j) top = std::max({top, p[j], x[j]});
  top = nice_top(top);

  std::ostringstream out;
  svg_open(out, "Empirical vs smoothed distribution");
  svg_y_axis(out, top, "probability");
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double slot = plot_w / static_cast<double>(n);
  const double bar = slot * 0.35;
  for (std::size_t j = 0; j < n; ++j) {
    const double x0 = kLeft + slot * static_cast<double>(j) + slot * 0.15;
    const double values[2] = {p[j], x[j]};
    const char* colors[2] = {"#999999", kPalette[0]};
    for (int k = 0; k < 2; ++k) {
      const double h = plot_h * values[k] / top;
      out << "<rect x=\"" << fixed(x0 + bar * k, 1) << "\" y=\"" << fixed(kHeight - kBottom - h, 1)
          << "\" width=\"" << fixed(bar, 1) << "\" height=\"" << fixed(h, 1) << "\" fill=\"" << colors[k]
          << "\"/>\n";
    }
    out << "<text x=\"" << fixed(x0 + bar, 1) << "\" y=\"" << fixed(kHeight - kBottom + 18, 1)
        << "\" text-anchor=\"middle\">" << j + 1 << "</text>\n";
  }
  out << "<text x=\"" << fixed(kLeft + plot_w / 2, 1) << "\" y=\"" << fixed(kHeight - 10, 1)
      << "\" text-anchor=\"middle\">category</text>\n";
  svg_legend(out, 0, "#999999", "empirical");
  svg_legend(out, 1, kPalette[0], "smoothed");
  out << "</svg>\n";
  return out.str();
}

std::string sweep_svg(const SweepResult& r) {
  const std::size_t n = r.p_hat.size();
  double top = 0.0;
  for (const auto& sol : r.solutions) top = std::max(top, *std::max_element(sol.x.vec().begin(), sol.x.vec().end()));
  top = nice_top(top);
  const double e_lo = r.epsilon_grid.empty() ? 0.0 : r.epsilon_grid.front();
  double e_hi = r.epsilon_grid.empty() ? 1.0 : r.epsilon_grid.back();
  if (e_hi <= e_lo) e_hi = e_lo + 1.0;

  std::ostringstream out;
  svg_open(out, "Smoothed probabilities across the robustness radius");
  svg_y_axis(out, top, "probability");
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double e) { return kLeft + plot_w * (e - e_lo) / (e_hi - e_lo); };
  auto py = [&](double v) { return kTop + plot_h * (1.0 - v / top); };
  for (double e : r.epsilon_grid) {
    out << "<text x=\"" << fixed(px(e), 1) << "\" y=\"" << fixed(kHeight - kBottom + 18, 1)
        << "\" text-anchor=\"middle\">" << fixed(e, 2) << "</text>\n";
  }
  out << "<text x=\"" << fixed(kLeft + plot_w / 2, 1) << "\" y=\"" << fixed(kHeight - 10, 1)
      << "\" text-anchor=\"middle\">epsilon</text>\n";
  for (std::size_t j = 0; j < n; ++j) {
    const char* color = kPalette[j % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      if (k) out << ' ';
      out << fixed(px(r.epsilon_grid[k]), 1) << ',' << fixed(py(r.solutions[k].x[j]), 1);
    }
    out << "\"/>\n";
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      out << "<circle cx=\"" << fixed(px(r.epsilon_grid[k]), 1) << "\" cy=\"" << fixed(py(r.solutions[k].x[j]), 1)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg_legend(out, j, color, "x" + std::to_string(j + 1));
  }
  out << "</svg>\n";
  return out.str();
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "epsilon";
  for (std::size_t j = 0; j < r.p_hat.size(); ++j) out += ",x" + std::to_string(j + 1);
  out += ",distance_to_uniform,distance_to_empirical,status,certified\n";
  for (std::size_t k = 0; k < r.solutions.size(); ++k) {
    out += fixed(r.epsilon_grid[k]) + ',' + io::csv_row(r.solutions[k].x.probs()) + ',' +
           fixed(r.distances_to_uniform[k]) + ',' + fixed(r.distances_to_empirical[k]) + ',' +
           to_string(r.solutions[k].status) + ',' + (r.certificates[k].passed ? "true" : "false") + '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_experiment1(const Experiment1Result& r, const ReportFormats& formats,
                                                    const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  if (formats.json) {
    const json j{{"instance", io::to_json(r.instance)},
                 {"solution", solution_json(r.solution)},
                 {"axioms", io::to_json(r.axioms)},
                 {"certificate", io::to_json(r.certificate)}};
    written.push_back(dir / "experiment1.json");
    write_file(written.back(), io::rounded(j).dump(2) + "\n");
  }
  if (formats.csv) {
    std::string text = "category,p_hat,x\n";
    for (std::size_t j = 0; j < r.instance.size(); ++j) {
      text += std::to_string(j + 1) + ',' + fixed(r.instance.p_hat[j]) + ',' + fixed(r.solution.x[j]) + '\n';
    }
    written.push_back(dir / "experiment1.csv");
    write_file(written.back(), text);
  }
  if (formats.svg) {
    written.push_back(dir / "experiment1.svg");
    write_file(written.back(), experiment1_svg(r));
  }
  return written;
}

std::vector<std::filesystem::path> emit_sweep(const SweepResult& r, const ReportFormats& formats,
                                              const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  if (formats.json) {
    json points = json::array();
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      points.push_back(json{{"epsilon", r.epsilon_grid[k]},
                            {"solution", solution_json(r.solutions[k])},
                            {"distance_to_uniform", r.distances_to_uniform[k]},
                            {"distance_to_empirical", r.distances_to_empirical[k]},
                            {"certificate", io::to_json(r.certificates[k])}});
    }
    const json j{{"p_hat", io::to_json(r.p_hat)},
                 {"q", r.q.is_infinity() ? json("inf") : json(r.q.value())},
                 {"epsilon_grid", r.epsilon_grid},
                 {"points", points}};
    written.push_back(dir / "sweep.json");
    write_file(written.back(), io::rounded(j).dump(2) + "\n");
  }
  if (formats.csv) {
    written.push_back(dir / "sweep.csv");
    write_file(written.back(), sweep_csv(r));
  }
  if (formats.svg) {
    written.push_back(dir / "sweep.svg");
    write_file(written.back(), sweep_svg(r));
  }
  return written;
}

std::vector<std::filesystem::path> emit_boundary(const BoundaryReport& r, const ReportFormats& formats,
                                                 const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  if (formats.json) {
    const json j{{"q_one", case_json(r.q_one)},
                 {"q_one_x2_minus_x1", r.q_one_gap_21},
                 {"q_inf", case_json(r.q_inf)},
                 {"q_inf_neg_log_x2_minus_beta", r.q_inf_residual_2},
                 {"q_inf_neg_log_x3_minus_beta", r.q_inf_residual_3}};
    written.push_back(dir / "boundary.json");
    write_file(written.back(), io::rounded(j).dump(2) + "\n");
  }
  if (formats.csv) {
    std::string text = "case,epsilon,category,p_hat,x,expected\n";
    for (const BoundaryCase* c : {&r.q_one, &r.q_inf}) {
      for (std::size_t j = 0; j < c->instance.size(); ++j) {
        text += c->name + ',' + fixed(c->instance.epsilon) + ',' + std::to_string(j + 1) + ',' +
                fixed(c->instance.p_hat[j]) + ',' + fixed(c->solution.x[j]) + ',' + fixed(c->expected[j]) + '\n';
      }
    }
    written.push_back(dir / "boundary.csv");
    write_file(written.back(), text);
  }
  return written;
}

bool ReproOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const GoldenCheck& c) { return c.pass; });
}

ReproOutcome run_repro(const SolverSettings& settings, const ReportFormats& formats,
                       const std::filesystem::path& dir) {
  ReproOutcome out;
  auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
  const double cert_tol = settings.tolerances.cert_tol;

  const Experiment1Result e1 = run_experiment1(settings);
  append(out.checks, experiment1_checks(e1));
  append(out.files, emit_experiment1(e1, formats, dir));

  const SweepResult sweep = run_sensitivity(sensitivity_p_hat(), QExponent::finite(2.0), default_eps_grid(), settings);
  append(out.checks, sweep_checks(sweep, cert_tol));
  append(out.files, emit_sweep(sweep, formats, dir));

  const BoundaryReport boundary = run_boundary_cases(settings);
  append(out.checks, boundary_checks(boundary, cert_tol));
  append(out.files, emit_boundary(boundary, formats, dir));
  return out;
}

}  // namespace qdro
