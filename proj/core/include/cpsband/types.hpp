#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cpsband {

/// Study values y and strictly positive auxiliary sizes x for N units.
struct PopulationFrame {
  std::vector<double> y;
  std::vector<double> x;

  std::size_t size() const noexcept { return y.size(); }

  /// Throws InvalidArgument unless N >= 1, |y| == |x| and every x_i > 0.
  void validate() const;
};

/// First-order inclusion probabilities of a fixed-size design.
struct InclusionProbabilities {
  std::vector<double> pi;
  int n = 0;

  std::size_t size() const noexcept { return pi.size(); }
};

/// Parameters of a Poisson design, and of the CPS design obtained by
/// conditioning it on sample size n. Units with p_i = 1 are certainties.
///
/// The conditional law depends on p only through the odds up to a common
/// factor; the canonical representative is the one with sum(p) == n.
struct PoissonParams {
  std::vector<double> p;
  int n = 0;

  std::size_t size() const noexcept { return p.size(); }
  bool is_canonical(double tol = 1e-9) const;
};

using CanonicalPoissonParams = PoissonParams;

/// 0/1 inclusion indicators; count is the number of ones.
struct SampleIndicators {
  std::vector<std::uint8_t> s;
  int count = 0;

  std::size_t size() const noexcept { return s.size(); }
  bool operator==(const SampleIndicators&) const = default;
};

}  // namespace cpsband
