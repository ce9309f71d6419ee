// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "dyadlab/additive.hpp"
#include "dyadlab/entropy.hpp"
#include "dyadlab/ifs.hpp"
#include "dyadlab/kernels.hpp"

using namespace dyadlab;

namespace {

TreeMeasure random_measure(int depth) {
  std::mt19937_64 g(1);
  std::vector<CellMass> leaves;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << depth); ++k) leaves.push_back({k, double(g() >> 11) + 1.0});
  double total = 0;
  for (auto& c : leaves) total += c.mass;
  for (auto& c : leaves) c.mass /= total;
  return TreeMeasure::from_leaves(1, depth, std::move(leaves));
}

GridSet random_grid(int n, double density, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  GridSet s(n, std::uint64_t{1} << n);
  for (std::uint64_t j = 0; j <= s.max_index(); ++j)
    if (double(g() >> 11) * 0x1.0p-53 < density) s.insert(j);
  return s;
}

const WeightedIFS& bernoulli_ifs() {
  static const WeightedIFS ifs = WeightedIFS::uniform({{0.62, 0.0}, {0.62, 1.0}});
  return ifs;
}

void BM_Entropy(benchmark::State& st) {
  static const auto mu = random_measure(22);
  for (auto _ : st) benchmark::DoNotOptimize(shannon_entropy(mu, 22).entropy_bits);
}
void BM_EntropySerial(benchmark::State& st) {
  static const auto mu = random_measure(22);
  for (auto _ : st) benchmark::DoNotOptimize(shannon_entropy_serial(mu, 22));
}

void BM_AtomBuild(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_tree_measure(bernoulli_ifs(), 8).words);
}
void BM_AtomBuildSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_tree_measure_serial(bernoulli_ifs(), 8).words);
}

void BM_Energy(benchmark::State& st) {
  static const auto a = random_grid(14, 0.05, 1), b = random_grid(14, 0.05, 2);
  for (auto _ : st) benchmark::DoNotOptimize(additive_energy(a, b));
}
void BM_EnergySerial(benchmark::State& st) {
  static const auto a = random_grid(14, 0.05, 1), b = random_grid(14, 0.05, 2);
  for (auto _ : st) benchmark::DoNotOptimize(additive_energy_serial(a, b));
}

void BM_EnergyDense(benchmark::State& st) {
  static const auto a = random_grid(12, 0.5, 5), b = random_grid(12, 0.5, 6);
  for (auto _ : st) benchmark::DoNotOptimize(additive_energy(a, b));
}
void BM_EnergyDenseSerial(benchmark::State& st) {
  static const auto a = random_grid(12, 0.5, 5), b = random_grid(12, 0.5, 6);
  for (auto _ : st) benchmark::DoNotOptimize(additive_energy_serial(a, b));
}

void BM_Union(benchmark::State& st) {
  static const auto a = random_grid(16, 0.02, 3);
  static const std::vector<GridSet> b_map(a.size(), random_grid(16, 0.02, 4));
  for (auto _ : st) benchmark::DoNotOptimize(translate_union_set(a, b_map).size());
}
void BM_UnionSerial(benchmark::State& st) {
  static const auto a = random_grid(16, 0.02, 3);
  static const std::vector<GridSet> b_map(a.size(), random_grid(16, 0.02, 4));
  for (auto _ : st) benchmark::DoNotOptimize(translate_union_set_serial(a, b_map).size());
}

}  // namespace

BENCHMARK(BM_Entropy)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EntropySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AtomBuild)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AtomBuildSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Energy)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyDense)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyDenseSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Union)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UnionSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
