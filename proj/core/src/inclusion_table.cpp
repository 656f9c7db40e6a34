#include "cpsband/inclusion_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpsband/error.hpp"

namespace cpsband {

InclusionTable::InclusionTable(std::span<const double> p, int n)
    : p_(p.begin(), p.end()), n_(n), stride_(static_cast<std::size_t>(n) + 1) {
  const std::size_t units = p_.size();
  if (n < 0 || static_cast<std::size_t>(n) > units) {
    throw InvalidArgument("InclusionTable: sample size outside [0, N]");
  }
  for (double pi : p_) {
    if (!(pi > 0.0 && pi < 1.0)) {
      throw InvalidArgument("InclusionTable: p must lie strictly inside (0, 1)");
    }
  }

  table_.assign((units + 1) * stride_, 0.0);
  log_scale_.assign(units + 1, 0.0);
  table_[units * stride_] = 1.0;  // empty suffix has size 0

  std::vector<double> column(stride_);
  for (std::size_t j = units; j-- > 0;) {
    const double pj = p_[j];
    const double qj = 1.0 - pj;
    const std::size_t next = (j + 1) * stride_;
    // At most N - j units remain, so larger sizes are impossible.
    const int kmax = static_cast<int>(std::min<std::size_t>(n_, units - j));
    double peak = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      double v = qj * table_[next + k];
      if (k > 0) v += pj * table_[next + k - 1];
      column[k] = v;
      peak = std::max(peak, v);
    }
    if (!(peak > 0.0) || !std::isfinite(peak)) {
      throw InternalError("InclusionTable: column rescaling failed");
    }
    const std::size_t here = j * stride_;
    for (int k = 0; k <= kmax; ++k) table_[here + k] = column[k] / peak;
    log_scale_[j] = log_scale_[j + 1] + std::log(peak);
  }
  step_.resize(units);
  for (std::size_t j = 0; j < units; ++j) {
    step_[j] = std::exp(log_scale_[j + 1] - log_scale_[j]);
  }
}

bool InclusionTable::reachable(std::size_t i, int r) const {
  if (r < 0 || r > n_ || i > p_.size()) return false;
  return scaled(r, i) > 0.0;
}

double InclusionTable::include_probability(std::size_t i, int r) const {
  if (r <= 0) return 0.0;
  const double denom = scaled(r, i);
  if (!(denom > 0.0)) {
    throw InternalError("InclusionTable: unreachable sampler state");
  }
  return p_[i] * scaled(r - 1, i + 1) / denom * step_[i];
}

double InclusionTable::exclude_probability(std::size_t i, int r) const {
  if (r <= 0) return 1.0;
  const double denom = scaled(r, i);
  if (!(denom > 0.0)) {
    throw InternalError("InclusionTable: unreachable sampler state");
  }
  return (1.0 - p_[i]) * scaled(r, i + 1) / denom * step_[i];
}

double InclusionTable::log_size_probability(int k, std::size_t j) const {
  if (k < 0 || k > n_ || j > p_.size()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double v = scaled(k, j);
  if (v <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(v) + log_scale_[j];
}

std::vector<double> InclusionTable::first_order() const {
  const std::size_t units = p_.size();
  std::vector<double> pi(units, 0.0);
  // mass[r]: probability that the chain reaches unit i with r slots left.
  std::vector<double> mass(stride_, 0.0), next(stride_, 0.0);
  mass[n_] = 1.0;
  for (std::size_t i = 0; i < units; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    next[0] += mass[0];
    double included = 0.0;
    // Before unit i at most i slots have been used.
    const int lowest = std::max(1, n_ - static_cast<int>(i));
    for (int r = lowest; r <= n_; ++r) {
      const double m = mass[r];
      if (m == 0.0 || !(scaled(r, i) > 0.0)) continue;
      const double take = m * include_probability(i, r);
      included += take;
      next[r - 1] += take;
      next[r] += m * exclude_probability(i, r);
    }
    pi[i] = included;
    mass.swap(next);
  }
  return pi;
}

}  // namespace cpsband
