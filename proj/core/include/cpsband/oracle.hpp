#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpsband/types.hpp"

namespace cpsband {

inline constexpr std::size_t kMaxEnumerationUnits = 20;

enum class DesignKind { kCps, kPoisson };

/// Exhaustive list of samples with their probabilities. Bit i of mask is
/// unit i's indicator.
struct DesignDistribution {
  struct Entry {
    std::uint32_t mask;
    double probability;
  };

  std::vector<Entry> samples;
  std::size_t units = 0;
  DesignKind kind = DesignKind::kCps;

  SampleIndicators indicators(const Entry& e) const;
};

/// Every size-n sample with probability proportional to
/// prod p^s (1 - p)^(1 - s). Throws InvalidArgument above 20 units.
DesignDistribution enumerate_cps_distribution(const PoissonParams& params);

/// Every subset with its Poisson(p) probability.
DesignDistribution enumerate_poisson_distribution(std::span<const double> p);

struct InclusionOrders {
  std::vector<double> first;
  Eigen::MatrixXd second;  // pi_ij, with pi_ii = pi_i on the diagonal
};

InclusionOrders exact_inclusion_orders(const DesignDistribution& d);

struct DesignMoments {
  double mean = 0.0;
  double variance = 0.0;
};

using SampleStatistic = std::function<double(const SampleIndicators&)>;

DesignMoments exact_design_moments(const DesignDistribution& d,
                                   const SampleStatistic& statistic);

/// sum_s |P1(s) - P2(s)| over the union of supports (no 1/2 factor, so
/// disjoint supports give 2).
double total_variation(const DesignDistribution& a, const DesignDistribution& b);

/// Empirical distribution of a list of drawn sample masks.
DesignDistribution empirical_distribution(std::span<const std::uint32_t> masks,
                                          std::size_t units, DesignKind kind);

std::uint32_t to_mask(const SampleIndicators& s);

}  // namespace cpsband
