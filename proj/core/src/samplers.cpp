#include "cpsband/samplers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cpsband/error.hpp"
#include "cpsband/inclusion_table.hpp"

namespace cpsband {

namespace {

void check_params(const PoissonParams& params, const char* who) {
  if (params.n < 0 || static_cast<std::size_t>(params.n) > params.p.size()) {
    throw InvalidArgument(std::string(who) + ": sample size outside [0, N]");
  }
  for (double p : params.p) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidArgument(std::string(who) + ": p must lie in (0, 1]");
    }
  }
}

}  // namespace

SampleIndicators poisson_sample(const PoissonParams& params, RngStream& rng) {
  check_params(params, "poisson_sample");
  SampleIndicators out;
  out.s.resize(params.p.size());
  for (std::size_t i = 0; i < params.p.size(); ++i) {
    // uniform() < 1 always, so p == 1 is a certainty.
    const bool hit = rng.uniform() < params.p[i];
    out.s[i] = hit ? 1 : 0;
    out.count += hit ? 1 : 0;
  }
  return out;
}

SampleIndicators cps_sample_rejection(const PoissonParams& params,
                                      RngStream& rng,
                                      std::int64_t max_attempts) {
  check_params(params, "cps_sample_rejection");
  if (max_attempts < 1) {
    throw InvalidArgument("cps_sample_rejection: max_attempts must be >= 1");
  }
  // Sizes 0 and N have a single sample in the support.
  if (params.n == 0 || static_cast<std::size_t>(params.n) == params.p.size()) {
    SampleIndicators s;
    s.s.assign(params.p.size(), params.n == 0 ? 0 : 1);
    s.count = params.n;
    return s;
  }
  for (std::int64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    SampleIndicators s = poisson_sample(params, rng);
    if (s.count == params.n) return s;
  }

  // Expected attempts = 1 / P(Poisson size == n), reported for the caller.
  std::vector<double> free_p;
  int certainties = 0;
  for (double p : params.p) {
    if (p < 1.0) {
      free_p.push_back(p);
    } else {
      ++certainties;
    }
  }
  double expected = std::numeric_limits<double>::infinity();
  const int reduced = params.n - certainties;
  if (reduced >= 0 && static_cast<std::size_t>(reduced) <= free_p.size()) {
    if (free_p.empty()) {
      expected = 1.0;
    } else {
      const InclusionTable table(free_p, reduced);
      expected = std::exp(-table.log_size_probability(reduced, 0));
    }
  }
  throw AttemptsExhausted("cps_sample_rejection: no sample of size " +
                              std::to_string(params.n) + " in " +
                              std::to_string(max_attempts) +
                              " attempts (expected " + std::to_string(expected) +
                              ")",
                          max_attempts, expected);
}

SampleIndicators cps_sample_sequential(const PoissonParams& params,
                                       RngStream& rng) {
  check_params(params, "cps_sample_sequential");
  const std::size_t units = params.p.size();

  std::vector<std::size_t> free_units;
  std::vector<double> free_p;
  SampleIndicators out;
  out.s.assign(units, 0);
  for (std::size_t i = 0; i < units; ++i) {
    if (params.p[i] < 1.0) {
      free_units.push_back(i);
      free_p.push_back(params.p[i]);
    } else {
      out.s[i] = 1;
      ++out.count;
    }
  }
  if (params.n < out.count) {
    throw InvalidArgument(
        "cps_sample_sequential: n is smaller than the number of certainties");
  }
  int remaining = params.n - out.count;
  if (remaining == 0) return out;
  if (static_cast<std::size_t>(remaining) == free_units.size()) {
    for (std::size_t i : free_units) out.s[i] = 1;
    out.count = params.n;
    return out;
  }

  const InclusionTable table(free_p, remaining);
  for (std::size_t k = 0; k < free_units.size() && remaining > 0; ++k) {
    const double q = table.include_probability(k, remaining);
    if (!(q >= 0.0 && q <= 1.0 + 1e-12)) {
      throw InternalError("cps_sample_sequential: inclusion probability " +
                          std::to_string(q) + " outside [0, 1]");
    }
    if (rng.uniform() < q) {
      out.s[free_units[k]] = 1;
      ++out.count;
      --remaining;
    }
  }
  if (remaining != 0) {
    throw InternalError("cps_sample_sequential: sample size not reached");
  }
  return out;
}

SampleIndicators cps_sample(const PoissonParams& params, RngStream& rng,
                            SamplerKind kind) {
  return kind == SamplerKind::kRejection ? cps_sample_rejection(params, rng)
                                         : cps_sample_sequential(params, rng);
}

InclusionFrequencies estimate_inclusion_frequencies(const Sampler& sampler,
                                                    int reps,
                                                    const RngStream& rng) {
  if (reps < 1) {
    throw InvalidArgument("estimate_inclusion_frequencies: reps must be >= 1");
  }
  std::vector<double> hits;
  for (int b = 0; b < reps; ++b) {
    RngStream stream = rng.substream(static_cast<std::uint64_t>(b));
    const SampleIndicators s = sampler(stream);
    if (hits.empty()) hits.assign(s.size(), 0.0);
    if (s.size() != hits.size()) {
      throw InvalidArgument("estimate_inclusion_frequencies: sample length changed");
    }
    for (std::size_t i = 0; i < s.size(); ++i) hits[i] += s.s[i];
  }
  InclusionFrequencies out;
  out.reps = reps;
  out.frequency.resize(hits.size());
  out.std_error.resize(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const double f = hits[i] / reps;
    out.frequency[i] = f;
    out.std_error[i] = std::sqrt(f * (1.0 - f) / reps);
  }
  return out;
}

}  // namespace cpsband
