#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cpsband/rng.hpp"
#include "cpsband/types.hpp"

namespace cpsband {

enum class SamplerKind { kSequential, kRejection };

/// Independent Bernoulli(p_i) indicators.
SampleIndicators poisson_sample(const PoissonParams& params, RngStream& rng);

inline constexpr std::int64_t kDefaultMaxAttempts = 10'000;

/// Draws Poisson samples until one has size n. Throws AttemptsExhausted
/// (carrying the attempts used and 1/P(size == n)) when the budget runs out.
SampleIndicators cps_sample_rejection(const PoissonParams& params,
                                      RngStream& rng,
                                      std::int64_t max_attempts = kDefaultMaxAttempts);

/// Exact fixed-size CPS draw in O(N n): units are visited in index order and
/// unit i is taken with its conditional probability given the slots left.
SampleIndicators cps_sample_sequential(const PoissonParams& params,
                                       RngStream& rng);

SampleIndicators cps_sample(const PoissonParams& params, RngStream& rng,
                            SamplerKind kind);

using Sampler = std::function<SampleIndicators(RngStream&)>;

struct InclusionFrequencies {
  std::vector<double> frequency;
  std::vector<double> std_error;
  int reps = 0;
};

/// Monte Carlo first-order inclusion frequencies with binomial standard
/// errors. Replication b draws from rng.substream(b).
InclusionFrequencies estimate_inclusion_frequencies(const Sampler& sampler,
                                                    int reps,
                                                    const RngStream& rng);

}  // namespace cpsband
