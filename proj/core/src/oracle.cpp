#include "cpsband/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "cpsband/error.hpp"

namespace cpsband {

namespace {

void check_units(std::size_t units) {
  if (units == 0) throw InvalidArgument("enumeration: no units");
  if (units > kMaxEnumerationUnits) {
    throw InvalidArgument("enumeration: more than 20 units is not supported");
  }
}

double poisson_weight(std::span<const double> p, std::uint32_t mask) {
  double w = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    w *= (mask >> i) & 1U ? p[i] : 1.0 - p[i];
  }
  return w;
}

}  // namespace

SampleIndicators DesignDistribution::indicators(const Entry& e) const {
  SampleIndicators s;
  s.s.resize(units);
  for (std::size_t i = 0; i < units; ++i) s.s[i] = (e.mask >> i) & 1U;
  s.count = std::popcount(e.mask);
  return s;
}

std::uint32_t to_mask(const SampleIndicators& s) {
  check_units(s.s.size());
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < s.s.size(); ++i) {
    if (s.s[i]) mask |= 1U << i;
  }
  return mask;
}

DesignDistribution enumerate_cps_distribution(const PoissonParams& params) {
  const std::size_t units = params.p.size();
  check_units(units);
  if (params.n < 0 || static_cast<std::size_t>(params.n) > units) {
    throw InvalidArgument("enumerate_cps_distribution: n outside [0, N]");
  }
  for (double p : params.p) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidArgument("enumerate_cps_distribution: p must lie in (0, 1]");
    }
  }

  DesignDistribution d;
  d.units = units;
  d.kind = DesignKind::kCps;
  double total = 0.0;
  const std::uint32_t end = 1U << units;
  for (std::uint32_t mask = 0; mask < end; ++mask) {
    if (std::popcount(mask) != params.n) continue;
    const double w = poisson_weight(params.p, mask);
    d.samples.push_back({mask, w});
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument(
        "enumerate_cps_distribution: no size-n sample has positive probability");
  }
  for (auto& e : d.samples) e.probability /= total;
  return d;
}

DesignDistribution enumerate_poisson_distribution(std::span<const double> p) {
  check_units(p.size());
  DesignDistribution d;
  d.units = p.size();
  d.kind = DesignKind::kPoisson;
  const std::uint32_t end = 1U << p.size();
  d.samples.reserve(end);
  for (std::uint32_t mask = 0; mask < end; ++mask) {
    d.samples.push_back({mask, poisson_weight(p, mask)});
  }
  return d;
}

InclusionOrders exact_inclusion_orders(const DesignDistribution& d) {
  const auto units = static_cast<Eigen::Index>(d.units);
  InclusionOrders out;
  out.first.assign(d.units, 0.0);
  out.second = Eigen::MatrixXd::Zero(units, units);
  for (const auto& e : d.samples) {
    for (Eigen::Index i = 0; i < units; ++i) {
      if (!((e.mask >> i) & 1U)) continue;
      out.first[i] += e.probability;
      for (Eigen::Index j = 0; j < units; ++j) {
        if ((e.mask >> j) & 1U) out.second(i, j) += e.probability;
      }
    }
  }
  return out;
}

DesignMoments exact_design_moments(const DesignDistribution& d,
                                   const SampleStatistic& statistic) {
  std::vector<double> values;
  values.reserve(d.samples.size());
  double mean = 0.0;
  for (const auto& e : d.samples) {
    values.push_back(statistic(d.indicators(e)));
    mean += e.probability * values.back();
  }
  double variance = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double dev = values[k] - mean;
    variance += d.samples[k].probability * dev * dev;
  }
  return {mean, variance};
}

double total_variation(const DesignDistribution& a, const DesignDistribution& b) {
  if (a.units != b.units) {
    throw InvalidArgument("total_variation: distributions over different populations");
  }
  std::map<std::uint32_t, double> diff;
  for (const auto& e : a.samples) diff[e.mask] += e.probability;
  for (const auto& e : b.samples) diff[e.mask] -= e.probability;
  double tv = 0.0;
  for (const auto& [mask, delta] : diff) tv += std::abs(delta);
  return tv;
}

DesignDistribution empirical_distribution(std::span<const std::uint32_t> masks,
                                          std::size_t units, DesignKind kind) {
  check_units(units);
  if (masks.empty()) throw InvalidArgument("empirical_distribution: no draws");
  std::map<std::uint32_t, double> counts;
  for (std::uint32_t m : masks) counts[m] += 1.0;
  DesignDistribution d;
  d.units = units;
  d.kind = kind;
  const double total = static_cast<double>(masks.size());
  for (const auto& [mask, count] : counts) d.samples.push_back({mask, count / total});
  return d;
}

}  // namespace cpsband
