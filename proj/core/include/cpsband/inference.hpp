#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpsband/empirical_process.hpp"
#include "cpsband/rng.hpp"
#include "cpsband/types.hpp"

namespace cpsband {

enum class EstimatorKind { kHorvitzThompson, kHajek };

struct CovarianceEstimate {
  Eigen::MatrixXd matrix;
  EstimatorKind kind = EstimatorKind::kHorvitzThompson;
  std::vector<double> thresholds;
};

/// y values of the sampled units, in unit order.
std::vector<double> sampled_thresholds(const PopulationFrame& pop,
                                       const SampleIndicators& s);

/// Plug-in covariance of the HTEP limit on {I(y <= t_r)}:
///
///   Sigma'_{rc} = N^{-1} sum_k s_k (1 - pi_k) / pi_k^2 Z_{kr} Z_{kc},
///   Z_{kr} = I(y_k <= t_r) - pi_k Rhat_r,
///   Rhat_r = sum_k (s_k / pi_k) I(y_k <= t_r) (1 - pi_k) / sum_k pi_k (1 - pi_k).
///
/// Throws DegenerateDesign when sum pi_k (1 - pi_k) == 0.
CovarianceEstimate estimate_cov_ht(const PopulationFrame& pop,
                                   const InclusionProbabilities& pi,
                                   const SampleIndicators& s,
                                   std::span<const double> thresholds);

/// Plug-in covariance of the HEP limit: the same weighted sum applied to the
/// centered indicators I(y <= t_r) - Fhat(t_r), with Fhat the Hajek CDF
/// estimate, and normalised by Nhat = sum_k s_k / pi_k instead of N.
CovarianceEstimate estimate_cov_hajek(const PopulationFrame& pop,
                                      const InclusionProbabilities& pi,
                                      const SampleIndicators& s,
                                      std::span<const double> thresholds);

// Analytic limit covariances, estimated by Monte Carlo over draws of (Y, w(X)).

struct ModelDraws {
  std::vector<double> y;
  std::vector<double> w;
};

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
};

using UnitFunction = std::function<double(double)>;

MonteCarloValue limit_cov_ht(const UnitFunction& f, const UnitFunction& g,
                             const ModelDraws& draws, double theta);

MonteCarloValue limit_cov_hajek(const UnitFunction& f, const UnitFunction& g,
                                const ModelDraws& draws, double theta);

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;  // epsilon added to the diagonal
};

/// L with L L^T = m + eps I. eps steps through {0, 1e-12, 1e-10, 1e-8} times
/// trace(m) / r until the factorization succeeds; throws InternalError if it
/// never does.
CholeskyFactor cholesky_psd(const Eigen::MatrixXd& m);

struct QuantileEstimate {
  double gamma = 0.0;
  double q_hat = 0.0;
  int mc_draws = 0;
};

/// r x B matrix of independent standard normals, filled column by column.
Eigen::MatrixXd standard_normal_draws(Eigen::Index r, int b, RngStream& rng);

/// ||L Z_b||_inf for every column of z, sorted ascending.
std::vector<double> sorted_sup_norms(const Eigen::MatrixXd& lower,
                                     const Eigen::MatrixXd& z);

/// Order statistic at index ceil(gamma * B) (1-based) of sorted draws.
double order_statistic_quantile(std::span<const double> sorted, double gamma);

/// gamma-quantile of ||G||_inf for G ~ N(0, L L^T), from B' simulated draws.
QuantileEstimate simulate_sup_quantile(const Eigen::MatrixXd& lower,
                                       double gamma, int b_prime,
                                       RngStream& rng);

struct ConfidenceBand {
  std::vector<double> t;
  std::vector<double> center;
  std::vector<double> lower;  // clipped to [0, 1]
  std::vector<double> upper;  // clipped to [0, 1]
  double halfwidth = 0.0;
  double gamma = 0.0;

  double width() const noexcept { return 2.0 * halfwidth; }
};

/// center +- q_hat / sqrt(N).
ConfidenceBand build_band(const ThresholdGrid& grid,
                          std::span<const double> center,
                          const QuantileEstimate& q, std::size_t population_size);

/// sup_stat <= q_hat.
bool coverage_check(double sup_stat, const QuantileEstimate& q);

}  // namespace cpsband
