#include <benchmark/benchmark.h>

#include "cpsband/design.hpp"
#include "cpsband/population_model.hpp"
#include "cpsband/samplers.hpp"

namespace {

using namespace cpsband;

InclusionProbabilities pips_for(std::size_t units, double alpha) {
  RngStream rng(42);
  const PopulationFrame pop = generate_population(units, rng);
  return compute_pips_probabilities(pop.x, static_cast<int>(alpha * units));
}

void BM_ForwardMap(benchmark::State& state) {
  const InclusionProbabilities pi = pips_for(state.range(0), 0.10);
  const CanonicalPoissonParams p = poisson_from_cps_inclusion(pi);
  for (auto _ : state) benchmark::DoNotOptimize(cps_inclusion_from_poisson(p));
}

void BM_Inversion(benchmark::State& state) {
  const InclusionProbabilities pi = pips_for(state.range(0), 0.10);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_from_cps_inclusion(pi));
}

void BM_SequentialSample(benchmark::State& state) {
  const CanonicalPoissonParams p = poisson_from_cps_inclusion(pips_for(state.range(0), 0.10));
  RngStream rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(cps_sample_sequential(p, rng));
}

void BM_RejectionSample(benchmark::State& state) {
  const CanonicalPoissonParams p = poisson_from_cps_inclusion(pips_for(state.range(0), 0.10));
  RngStream rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(cps_sample_rejection(p, rng));
}

BENCHMARK(BM_ForwardMap)->Arg(500)->Arg(2000);
BENCHMARK(BM_Inversion)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SequentialSample)->Arg(500)->Arg(2000);
BENCHMARK(BM_RejectionSample)->Arg(500)->Arg(2000);

}  // namespace
