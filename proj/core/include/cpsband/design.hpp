#pragma once

#include <span>

#include "cpsband/types.hpp"

namespace cpsband {

/// Inclusion probabilities proportional to size with clipping at one:
/// pi_i = min{c * x_i / sum(x), 1}, with c found by bisection so that
/// sum(pi) == n.
InclusionProbabilities compute_pips_probabilities(std::span<const double> x,
                                                  int n);

/// Exact first-order inclusion probabilities of the CPS design obtained by
/// conditioning Poisson(p) on size n. p_i must lie in (0, 1]; p_i == 1 units
/// are certainties and are removed before the recursion.
InclusionProbabilities cps_inclusion_from_poisson(const PoissonParams& params);

struct InversionOptions {
  double tolerance = 1e-11;
  double damping = 0.8;
  int max_iterations = 500;
};

/// Recovers the canonical Poisson parameters whose CPS design has the given
/// first-order inclusion probabilities. Units with pi_i == 1 come back with
/// p_i == 1. Throws ConvergenceError with the final residual if the
/// iteration cap is hit.
CanonicalPoissonParams poisson_from_cps_inclusion(
    const InclusionProbabilities& target, const InversionOptions& options = {});

/// Rescales the odds of the non-certainty units by a common factor so that
/// sum(p) == n. The CPS law is unchanged.
CanonicalPoissonParams canonicalize(const PoissonParams& params);

/// Theta with mean_i min{theta * w_i / mean(w), 1} == alpha.
double solve_theta(double alpha, std::span<const double> w_samples);

/// min{w, mean_w / theta}.
double truncated_weight(double w, double theta, double mean_w);

/// d_N = sum p_i (1 - p_i), the variance of the Poisson sample size.
double design_variance_d(std::span<const double> p);

}  // namespace cpsband
