#pragma once

#include <span>
#include <string>
#include <vector>

#include "cpsband/simulation.hpp"

namespace cpsband {

/// Two tables (HTEP, HEP) with one block per (N, alpha): coverage on the
/// first line and "(avg; max)" widths on the second, one column per gamma.
/// Gammas are taken from the first report.
std::string format_report_text(std::span<const CoverageReport> reports);

/// estimator,N,alpha,n,B,B_prime,seed,gamma,coverage,avg_width,max_width
std::string format_report_csv(std::span<const CoverageReport> reports);

struct ReportRow {
  std::string estimator;  // "HTEP" or "HEP"
  std::size_t population_size = 0;
  double alpha = 0.0;
  int sample_size = 0;
  int replications = 0;
  int b_prime = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double coverage = 0.0;
  double average_width = 0.0;
  double max_width = 0.0;
};

std::vector<ReportRow> parse_report_csv(const std::string& csv);

std::string format_replications_csv(const SimConfig& config,
                                    std::span<const ReplicationRecord> records);

}  // namespace cpsband
