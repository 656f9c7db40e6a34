#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpsband {

/// Size distributions of Poisson designs restricted to the suffixes of a
/// unit list, for sizes 0..n:
///
///     phi(k, j) = P(sum_{l >= j} S_l == k),  S_l ~ Bernoulli(p_l) independent.
///
/// This is the odds-based elementary symmetric function e_k(odds_j..odds_N)
/// times prod_{l >= j}(1 - p_l), so every ratio the CPS computations need is
/// the same in either form. Each column is divided by its maximum and the
/// log of the divisor is kept separately, so entries stay in [0, 1] and the
/// recursion never subtracts.
///
/// All p must lie strictly inside (0, 1); certainties are reduced away by the
/// callers.
class InclusionTable {
 public:
  InclusionTable(std::span<const double> p, int n);

  std::size_t units() const noexcept { return p_.size(); }
  int sample_size() const noexcept { return n_; }

  /// P(unit i is drawn | r slots remain when unit i is reached) under the
  /// CPS(p, n) chain. Zero when r == 0.
  double include_probability(std::size_t i, int r) const;

  /// Complement of include_probability, computed without subtraction.
  double exclude_probability(std::size_t i, int r) const;

  /// True when r slots can still be filled from units i..N-1.
  bool reachable(std::size_t i, int r) const;

  /// log P(sum_{l >= j} S_l == k); -inf when impossible.
  double log_size_probability(int k, std::size_t j) const;

  /// Exact CPS first-order inclusion probabilities, O(N n).
  std::vector<double> first_order() const;

 private:
  double scaled(int k, std::size_t j) const {
    return table_[j * stride_ + static_cast<std::size_t>(k)];
  }

  std::vector<double> p_;
  int n_;
  std::size_t stride_;
  std::vector<double> table_;      // column-major: (N + 1) columns of n + 1
  std::vector<double> log_scale_;  // per column
  std::vector<double> step_;       // exp(log_scale_[j + 1] - log_scale_[j])
};

}  // namespace cpsband
