#pragma once

#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "qdro/axioms.hpp"
#include "qdro/core.hpp"
#include "qdro/inner_adversary.hpp"
#include "qdro/solver.hpp"

namespace qdro::io {

using nlohmann::json;

json to_json(const Distribution& d);
Distribution distribution_from_json(const json& j);
/// Comma-separated numbers, e.g. "0.0,0.15,0.15,0.30,0.40".
Distribution parse_distribution(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

/// {p_hat: [...], epsilon: number, q: number | "inf"}
json to_json(const Instance& inst);
Instance instance_from_json(const json& j);

/// {x, beta, lambda, objective, t, degenerate, iterations, status,
///  kkt_max_residual, duality_gap}; the last two are null when absent.
json to_json(const Solution& sol, std::optional<double> kkt_max_residual,
             std::optional<double> duality_gap);
Solution solution_from_json(const json& j);

json to_json(const AxiomReport& report);
json to_json(const KKTReport& report);
json to_json(const Certificate& cert);
json to_json(const WorstCase& wc);

/// Numbers rounded to `decimals` places, recursively. Gives stable text for
/// report files.
json rounded(const json& j, int decimals = 6);

/// Fixed-point text with `decimals` places.
std::string fixed(double v, int decimals = 6);
std::string csv_row(std::span<const double> values, int decimals = 6);

}  // namespace qdro::io
