#include <benchmark/benchmark.h>

#include "cpsband/simulation.hpp"
#include "cpsband/design.hpp"
#include "cpsband/inference.hpp"
#include "cpsband/population_model.hpp"

namespace {

using namespace cpsband;

struct Fixture {
  PopulationFrame pop;
  InclusionProbabilities pi;
  SampleIndicators s;
  std::vector<double> thresholds;
};

Fixture make_fixture(std::size_t units) {
  RngStream rng(3);
  Fixture f;
  f.pop = generate_population(units, rng);
  f.pi = compute_pips_probabilities(f.pop.x, static_cast<int>(units / 10));
  f.s = cps_sample_sequential(poisson_from_cps_inclusion(f.pi), rng);
  f.thresholds = sampled_thresholds(f.pop, f.s);
  return f;
}

void BM_CovarianceHt(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_cov_ht(f.pop, f.pi, f.s, f.thresholds));
  }
}

void BM_SupQuantile(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  const CholeskyFactor l = cholesky_psd(estimate_cov_ht(f.pop, f.pi, f.s, f.thresholds).matrix);
  RngStream rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_sup_quantile(l.lower, 0.95, 1000, rng));
}

void BM_Replication(benchmark::State& state) {
  SimConfig config;
  config.population_size = static_cast<std::size_t>(state.range(0));
  int rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(config, rep++));
}

BENCHMARK(BM_CovarianceHt)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupQuantile)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Replication)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
