#include "qdro/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace qdro::io {

namespace {

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json witness(const std::optional<PairWitness>& w) {
  if (!w) return nullptr;
  return json{{"categories", {w->i + 1, w->j + 1}}, {"magnitude", w->magnitude}};
}

}  // namespace

json to_json(const Distribution& d) { return json(d.vec()); }

Distribution distribution_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "distribution must be a JSON array");
  return Distribution::validate(j.get<std::vector<double>>());
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "cannot parse number '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw Error(ErrorCode::InvalidArgument, "cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

Distribution parse_distribution(const std::string& text) {
  return Distribution::validate(parse_number_list(text));
}

json to_json(const Instance& inst) {
  json q = inst.q.is_infinity() ? json("inf") : json(inst.q.value());
  return json{{"p_hat", to_json(inst.p_hat)}, {"epsilon", inst.epsilon}, {"q", q}};
}

Instance instance_from_json(const json& j) {
  try {
    const QExponent q = j.at("q").is_string() ? QExponent::parse(j.at("q").get<std::string>())
                                              : QExponent::finite(j.at("q").get<double>());
    return Instance(distribution_from_json(j.at("p_hat")), j.at("epsilon").get<double>(), q);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad instance JSON: ") + e.what());
  }
}

json to_json(const Solution& sol, std::optional<double> kkt_max_residual,
             std::optional<double> duality_gap) {
  json j;
  j["x"] = to_json(sol.x);
  j["beta"] = sol.beta;
  j["lambda"] = sol.lambda;
  j["objective"] = sol.objective;
  j["t"] = sol.t;
  j["degenerate"] = sol.degenerate;
  j["iterations"] = sol.iterations;
  j["status"] = to_string(sol.status);
  j["kkt_max_residual"] = optional_number(kkt_max_residual);
  j["duality_gap"] = optional_number(duality_gap);
  return j;
}

Solution solution_from_json(const json& j) {
  try {
    Solution sol{.x = distribution_from_json(j.at("x"))};
    sol.beta = j.at("beta").get<double>();
    sol.lambda = j.at("lambda").get<std::vector<double>>();
    if (sol.lambda.size() != sol.x.size()) {
      throw Error(ErrorCode::InvalidArgument, "lambda and x differ in length");
    }
    sol.objective = j.value("objective", 0.0);
    sol.t = j.value("t", 0.0);
    sol.degenerate = j.value("degenerate", false);
    sol.iterations = j.value("iterations", 0);
    sol.status = parse_status(j.value("status", std::string("Converged")));
    return sol;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad solution JSON: ") + e.what());
  }
}

json to_json(const AxiomReport& r) {
  const auto& op = r.order_preservation;
  return json{
      {"positivity",
       {{"pass", r.positivity.pass},
        {"min_component", r.positivity.min_component},
        {"category", r.positivity.argmin + 1}}},
      {"symmetry",
       {{"pass", r.symmetry.pass},
        {"pairs_checked", r.symmetry.pairs_checked},
        {"worst", witness(r.symmetry.worst)}}},
      {"order_preservation",
       {{"pass", op.pass},
        {"pairs_checked", op.pairs_checked},
        {"ties", op.ties},
        {"inversions", op.inversions},
        {"worst_tie", witness(op.worst_tie)},
        {"worst_inversion", witness(op.worst_inversion)}}},
      {"ratio_preservation",
       {{"pass", r.ratio_preservation.pass},
        {"pairs_checked", r.ratio_preservation.pairs_checked},
        {"min_quotient", r.ratio_preservation.min_quotient},
        {"max_quotient", r.ratio_preservation.max_quotient},
        {"spread", r.ratio_preservation.spread}}},
      {"tolerance_used", r.tolerance_used},
  };
}

json to_json(const KKTReport& r) {
  return json{
      {"stationarity_x", r.stationarity_x},
      {"stationarity_lambda", r.stationarity_lambda},
      {"stationarity_beta", r.stationarity_beta},
      {"complementarity", r.complementarity},
      {"gamma", r.gamma},
      {"xi", r.xi},
      {"max_residual", r.max_residual},
      {"gamma_deviation", r.gamma_deviation},
      {"xi_deviation", r.xi_deviation},
  };
}

json to_json(const Certificate& c) {
  return json{
      {"kkt", c.kkt ? to_json(*c.kkt) : json(nullptr)},
      {"duality_gap", c.duality_gap},
      {"optimality_gap", c.optimality_gap},
      {"assumption1", c.assumption1},
      {"norm_active", c.norm_active},
      {"passed", c.passed},
  };
}

json to_json(const WorstCase& wc) {
  return json{
      {"e", wc.e},
      {"p", to_json(wc.p)},
      {"loss", wc.loss},
      {"norm_active", wc.norm_active},
      {"nu_estimate", wc.nu_estimate},
      {"beta", std::isfinite(wc.beta) ? json(wc.beta) : json(nullptr)},
      {"lambda", wc.lambda},
      {"dual_bound", std::isfinite(wc.dual_bound) ? json(wc.dual_bound) : json(nullptr)},
  };
}

json rounded(const json& j, int decimals) {
  if (j.is_number_float()) {
    const double scale = std::pow(10.0, decimals);
    double v = std::round(j.get<double>() * scale) / scale;
    if (v == 0.0) v = 0.0;  // drop negative zero
    return v;
  }
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto& item : out) item = rounded(item, decimals);
    return out;
  }
  return j;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string csv_row(std::span<const double> values, int decimals) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += fixed(values[k], decimals);
  }
  return out;
}

}  // namespace qdro::io
