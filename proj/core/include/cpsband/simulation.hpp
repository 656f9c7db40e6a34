#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpsband/samplers.hpp"
#include "cpsband/types.hpp"

namespace cpsband {

/// How step-2 inclusion probabilities are assigned: proportional to x with
/// clipping at 1, or equal to n / N for every unit.
enum class InclusionDesign { kProportional, kEqual };

struct SimConfig {
  std::size_t population_size = 500;  // N
  double alpha = 0.10;                // sampling fraction, n = round(alpha N)
  int replications = 1000;            // B
  std::vector<double> gammas{0.90, 0.95, 0.99};
  int b_prime = 1000;                 // Gaussian draws per quantile
  std::uint64_t master_seed = 1;
  SamplerKind sampler = SamplerKind::kSequential;
  InclusionDesign inclusion = InclusionDesign::kProportional;
  int threads = 1;

  int sample_size() const;
  void validate() const;
};

/// Outcome of one pass through the coverage protocol. Vectors are indexed
/// like SimConfig::gammas.
struct ReplicationRecord {
  int index = 0;
  int sample_size = 0;
  double sup_ht = 0.0;
  double sup_hajek = 0.0;
  std::vector<double> q_ht;
  std::vector<double> q_hajek;
  double jitter_ht = 0.0;
  double jitter_hajek = 0.0;

  bool operator==(const ReplicationRecord&) const = default;
};

/// Fresh population, pips calibration, canonical p, CPS draw, sup statistics
/// on the full population grid, plug-in covariances on the sampled
/// thresholds, and Gaussian sup quantiles. Uses
/// RngStream(master_seed).substream(rep_index).
ReplicationRecord run_replication(const SimConfig& config, int rep_index);

struct CoverageCell {
  double gamma = 0.0;
  double coverage = 0.0;
  double average_width = 0.0;
  double max_width = 0.0;
};

struct CoverageReport {
  SimConfig config;
  std::vector<CoverageCell> ht;     // one per gamma
  std::vector<CoverageCell> hajek;  // one per gamma
  double runtime_seconds = 0.0;     // not part of formatted output
};

CoverageReport aggregate_records(const SimConfig& config,
                                 const std::vector<ReplicationRecord>& records);

/// Runs all B replications on config.threads workers and aggregates them.
/// Any failure is rethrown with the replication index and seed attached.
/// When records_out is non-null the per-replication records are stored there.
CoverageReport run_experiment(const SimConfig& config,
                              std::vector<ReplicationRecord>* records_out = nullptr);

}  // namespace cpsband
