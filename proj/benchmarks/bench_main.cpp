#include <benchmark/benchmark.h>

#include <random>

#include "qrng/ent90b.hpp"
#include "qrng/harness.hpp"
#include "qrng/sts22.hpp"

namespace {

using namespace qrng;

BitStream random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; i += 64) {
    const std::uint64_t w = rng();
    for (std::size_t j = 0; j < 64 && i + j < n; ++j) bits[i + j] = (w >> j) & 1u;
  }
  return BitStream(std::move(bits));
}

void BM_Simulate(benchmark::State& state) {
  const Topology spark = Topology::spark();
  const auto family = static_cast<Family>(state.range(0));
  const auto spec = family == Family::c3 ? CircuitSpec::make(family, GateChoice::h, {0, 1, 2, 3, 4})
                                         : CircuitSpec::make(family, GateChoice::h, {2});
  const auto noise = NoiseProfile::from_calibration(default_calibration());
  for (auto _ : state) benchmark::DoNotOptimize(run_spec(spec, spark, 100'000, noise, 1, {1}));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Sts22Family(benchmark::State& state) {
  const auto family = sts22::kFamilies[static_cast<std::size_t>(state.range(0))];
  const BitStream s = random_bits(1'000'000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sts22::run_test(family, s));
  state.SetLabel(std::string(sts22::family_name(family)));
}
BENCHMARK(BM_Sts22Family)->DenseRange(0, 14)->Unit(benchmark::kMillisecond);

void BM_Sts22Battery(benchmark::State& state) {
  const BitStream s = random_bits(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(sts22::run_battery(s));
}
BENCHMARK(BM_Sts22Battery)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_Ent90bEstimator(benchmark::State& state) {
  const auto e = ent90b::kEstimators[static_cast<std::size_t>(state.range(0))];
  const BitStream s = random_bits(1'000'000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ent90b::estimate(e, s));
  state.SetLabel(std::string(ent90b::estimator_name(e)));
}
BENCHMARK(BM_Ent90bEstimator)->DenseRange(0, 9)->Unit(benchmark::kMillisecond);

void BM_Ent90bAll(benchmark::State& state) {
  const BitStream s = random_bits(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(ent90b::min_entropy(s));
}
BENCHMARK(BM_Ent90bAll)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
