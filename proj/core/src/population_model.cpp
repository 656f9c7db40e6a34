#include "cpsband/population_model.hpp"

#include <cmath>

#include "cpsband/error.hpp"

namespace cpsband {

PopulationFrame generate_population(std::size_t n_units, RngStream& rng) {
  if (n_units < 2) throw InvalidArgument("generate_population: N must be >= 2");
  PopulationFrame pop;
  pop.x.resize(n_units);
  pop.y.resize(n_units);
  for (std::size_t i = 0; i < n_units; ++i) {
    const double x = std::exp(rng.normal());
    pop.x[i] = x;
    pop.y[i] = x + x * rng.normal();
  }
  return pop;
}

ModelDraws generate_model_draws(std::size_t mc_n, RngStream& rng) {
  if (mc_n == 0) throw InvalidArgument("generate_model_draws: need at least one draw");
  ModelDraws draws;
  draws.y.resize(mc_n);
  draws.w.resize(mc_n);
  for (std::size_t i = 0; i < mc_n; ++i) {
    const double x = std::exp(rng.normal());
    draws.w[i] = x;
    draws.y[i] = x + x * rng.normal();
  }
  return draws;
}

}  // namespace cpsband
