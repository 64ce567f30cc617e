#include <exception>
#include <optional>

#include "qdro/solver.hpp"

namespace qdro {

std::vector<Solution> solve_batch(std::span<const Instance> instances,
                                  const SolverSettings& settings) {
  const auto count = static_cast<std::ptrdiff_t>(instances.size());
  std::vector<std::optional<Solution>> slots(instances.size());
  std::vector<std::exception_ptr> failures(instances.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      slots[k] = solve_qdro(instances[k], settings);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }

  std::vector<Solution> out;
  out.reserve(instances.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (failures[k]) std::rethrow_exception(failures[k]);
    out.push_back(std::move(*slots[k]));
  }
  return out;
}

std::vector<Solution> solve_batch_serial(std::span<const Instance> instances,
                                         const SolverSettings& settings) {
  std::vector<Solution> out;
  out.reserve(instances.size());
  for (const Instance& inst : instances) out.push_back(solve_qdro(inst, settings));
  return out;
}

}  // namespace qdro
