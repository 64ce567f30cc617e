#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qdro/inner_adversary.hpp"
#include "qdro/solver.hpp"

namespace {

std::vector<qdro::Instance> random_instances(std::size_t count, std::size_t n, qdro::QExponent q) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> radius(0.02, 0.3);
  std::vector<qdro::Instance> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) sum += (v = unit(rng));
    for (double& v : p) v /= sum;
    out.emplace_back(qdro::Distribution::normalized(p), radius(rng), q);
  }
  return out;
}

void BM_SolveBatch(benchmark::State& state) {
  const auto instances = random_instances(static_cast<std::size_t>(state.range(0)), 8, qdro::QExponent::finite(2.0));
  for (auto _ : state) benchmark::DoNotOptimize(qdro::solve_batch(instances));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolveBatchSerial(benchmark::State& state) {
  const auto instances = random_instances(static_cast<std::size_t>(state.range(0)), 8, qdro::QExponent::finite(2.0));
  for (auto _ : state) benchmark::DoNotOptimize(qdro::solve_batch_serial(instances));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolveBoundaryQ(benchmark::State& state) {
  const auto instances = random_instances(64, 8, qdro::QExponent::infinity());
  for (auto _ : state) benchmark::DoNotOptimize(qdro::solve_batch_serial(instances));
}

qdro::Instance brute_instance() {
  return qdro::Instance(qdro::Distribution::validate(std::vector<double>{0.1, 0.2, 0.3, 0.4}), 0.2,
                        qdro::QExponent::finite(2.0));
}

void BM_BruteForce(benchmark::State& state) {
  const auto inst = brute_instance();
  const auto x = qdro::Distribution::uniform(4);
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qdro::brute_force_worst_case(x, inst, step));
}

void BM_BruteForceSerial(benchmark::State& state) {
  const auto inst = brute_instance();
  const auto x = qdro::Distribution::uniform(4);
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qdro::brute_force_worst_case_serial(x, inst, step));
}

void BM_WorstCase(benchmark::State& state) {
  const auto inst = brute_instance();
  const auto x = qdro::Distribution::uniform(4);
  for (auto _ : state) benchmark::DoNotOptimize(qdro::worst_case(x, inst));
}

}  // namespace

BENCHMARK(BM_SolveBatch)->Arg(16)->Arg(128)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveBatchSerial)->Arg(16)->Arg(128)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveBoundaryQ)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForce)->Arg(100)->Arg(200)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForceSerial)->Arg(100)->Arg(200)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WorstCase);

BENCHMARK_MAIN();
