#pragma once

#include <cstddef>

#include "cpsband/inference.hpp"
#include "cpsband/rng.hpp"
#include "cpsband/types.hpp"

namespace cpsband {

/// N independent units from the linear model Y = X + U with ln X ~ N(0, 1)
/// and U | X ~ N(0, X^2).
PopulationFrame generate_population(std::size_t n_units, RngStream& rng);

/// mc_n draws of (Y, w(X) = X) from the same model, for the limit
/// covariance Monte Carlo.
ModelDraws generate_model_draws(std::size_t mc_n, RngStream& rng);

}  // namespace cpsband
