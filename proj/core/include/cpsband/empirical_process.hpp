#pragma once

#include <span>
#include <vector>

#include "cpsband/types.hpp"

namespace cpsband {

/// Thresholds t for the indicator class {I(y <= t)}, strictly increasing.
struct ThresholdGrid {
  std::vector<double> t;

  /// Sorted, deduplicated population values: the jump points of every
  /// process on the indicator class.
  static ThresholdGrid from_values(std::span<const double> y);
};

enum class ProcessKind { kHorvitzThompson, kHajek, kCentered };

/// Process values at each threshold and their left limits.
struct ProcessEvaluation {
  std::vector<double> values;
  std::vector<double> values_left;
  ProcessKind kind = ProcessKind::kHorvitzThompson;
};

/// N^{-1/2} sum_i (S_i / pi_i - 1) I(y_i <= t).
ProcessEvaluation htep_evaluate(const PopulationFrame& pop,
                                const InclusionProbabilities& pi,
                                const SampleIndicators& s,
                                const ThresholdGrid& grid);

/// sqrt(N) (Nhat^{-1} sum_i (S_i / pi_i) I(y_i <= t) - F_N(t)) with
/// Nhat = sum_i S_i / pi_i. Throws InvalidArgument when Nhat == 0.
ProcessEvaluation hajek_evaluate(const PopulationFrame& pop,
                                 const InclusionProbabilities& pi,
                                 const SampleIndicators& s,
                                 const ThresholdGrid& grid);

/// N^{-1/2} sum_i (S_i / pi_i - 1) (I(y_i <= t) - F_N(t)).
ProcessEvaluation centered_process_evaluate(const PopulationFrame& pop,
                                            const InclusionProbabilities& pi,
                                            const SampleIndicators& s,
                                            const ThresholdGrid& grid);

/// Sup over the real line of a step function that only jumps at grid points:
/// max over the grid of max(|value|, |left limit|).
double sup_norm_cdf(const ProcessEvaluation& ev);

/// Population CDF F_N at each grid point.
std::vector<double> population_cdf(const PopulationFrame& pop,
                                   const ThresholdGrid& grid);

/// Estimated CDF at each grid point: N^{-1} sum (S_i / pi_i) I(y_i <= t) for
/// kHorvitzThompson, the same sum over Nhat for kHajek.
std::vector<double> cdf_estimate(const PopulationFrame& pop,
                                 const InclusionProbabilities& pi,
                                 const SampleIndicators& s,
                                 const ThresholdGrid& grid, ProcessKind kind);

/// Horvitz-Thompson estimator of N.
double ht_population_size(const InclusionProbabilities& pi,
                          const SampleIndicators& s);

// Projection of the Poisson-design HT estimator on the sample size. f holds
// f(y_i) for each unit.

/// R_N(f) = sum f_i (1 - p_i) / d_N, or 0 if d_N == 0.
double projection_residual_R(std::span<const double> f,
                             const PoissonParams& params);

/// T_N = N^{-1} sum (S_i / p_i) f_i - (R_N(f) / N) sum (S_i - p_i).
double projection_statistic_T(std::span<const double> f,
                              const SampleIndicators& s,
                              const PoissonParams& params);

/// B_N^2(f) = N^{-1} sum ((1 - p_i) / p_i) (f_i - R_N(f) p_i)^2, the design
/// variance of sqrt(N) T_N.
double poisson_projection_variance(std::span<const double> f,
                                   const PoissonParams& params);

}  // namespace cpsband
