#include "cpsband/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cpsband/design.hpp"
#include "cpsband/error.hpp"

namespace cpsband {

namespace {

struct SampledDesign {
  std::vector<std::size_t> units;  // sampled unit indices
  double poisson_variance = 0.0;   // sum over all units of pi (1 - pi)
};

SampledDesign sampled_design(const PopulationFrame& pop,
                             const InclusionProbabilities& pi,
                             const SampleIndicators& s) {
  if (pop.y.size() != pi.pi.size() || pop.y.size() != s.s.size()) {
    throw InvalidArgument("covariance estimate: length mismatch");
  }
  SampledDesign d;
  for (std::size_t k = 0; k < s.s.size(); ++k) {
    const double p = pi.pi[k];
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidArgument("covariance estimate: pi must lie in (0, 1]");
    }
    d.poisson_variance += p * (1.0 - p);
    if (s.s[k]) d.units.push_back(k);
  }
  if (!(d.poisson_variance > 0.0)) {
    throw DegenerateDesign(
        "covariance estimate: sum pi (1 - pi) == 0, design has no randomness");
  }
  return d;
}

// Z_{kr} for the sampled units k (rows) and thresholds r (columns).
Eigen::MatrixXd projected_indicators(const PopulationFrame& pop,
                                     const InclusionProbabilities& pi,
                                     const SampledDesign& d,
                                     std::span<const double> thresholds) {
  const Eigen::Index rows = static_cast<Eigen::Index>(d.units.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(thresholds.size());
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double t = thresholds[c];
    double numer = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      const std::size_t unit = d.units[k];
      const double ind = pop.y[unit] <= t ? 1.0 : 0.0;
      z(k, c) = ind;
      numer += ind * (1.0 - pi.pi[unit]) / pi.pi[unit];
    }
    const double r_hat = numer / d.poisson_variance;
    for (Eigen::Index k = 0; k < rows; ++k) {
      z(k, c) -= pi.pi[d.units[k]] * r_hat;
    }
  }
  return z;
}

// (1 / norm) sum_k (1 - pi_k) / pi_k^2 z_k z_k^T, exactly symmetric.
Eigen::MatrixXd weighted_gram(Eigen::MatrixXd z, const InclusionProbabilities& pi,
                              const SampledDesign& d, double norm) {
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    const double p = pi.pi[d.units[k]];
    z.row(k) *= std::sqrt((1.0 - p) / (p * p * norm));
  }
  const Eigen::Index cols = z.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  return gram.selfadjointView<Eigen::Lower>();
}

}  // namespace

std::vector<double> sampled_thresholds(const PopulationFrame& pop,
                                       const SampleIndicators& s) {
  std::vector<double> t;
  for (std::size_t k = 0; k < s.s.size(); ++k) {
    if (s.s[k]) t.push_back(pop.y[k]);
  }
  return t;
}

CovarianceEstimate estimate_cov_ht(const PopulationFrame& pop,
                                   const InclusionProbabilities& pi,
                                   const SampleIndicators& s,
                                   std::span<const double> thresholds) {
  const SampledDesign d = sampled_design(pop, pi, s);
  Eigen::MatrixXd z = projected_indicators(pop, pi, d, thresholds);
  CovarianceEstimate out;
  out.kind = EstimatorKind::kHorvitzThompson;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.matrix = weighted_gram(std::move(z), pi, d, static_cast<double>(pop.y.size()));
  return out;
}

CovarianceEstimate estimate_cov_hajek(const PopulationFrame& pop,
                                      const InclusionProbabilities& pi,
                                      const SampleIndicators& s,
                                      std::span<const double> thresholds) {
  const SampledDesign d = sampled_design(pop, pi, s);
  const Eigen::Index rows = static_cast<Eigen::Index>(d.units.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(thresholds.size());

  double n_hat = 0.0;
  for (std::size_t unit : d.units) n_hat += 1.0 / pi.pi[unit];

  // Z_{kr} of the indicator centered at its Hajek estimate Fhat_r:
  // c_k = I(y_k <= t_r) - Fhat_r and Z_{kr} = c_k - pi_k Rhat(c).
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double t = thresholds[c];
    double weighted = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      const std::size_t unit = d.units[k];
      z(k, c) = pop.y[unit] <= t ? 1.0 : 0.0;
      weighted += z(k, c) / pi.pi[unit];
    }
    const double f_hat = rows > 0 ? weighted / n_hat : 0.0;
    double numer = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      const double p = pi.pi[d.units[k]];
      z(k, c) -= f_hat;
      numer += z(k, c) * (1.0 - p) / p;
    }
    const double r_hat = numer / d.poisson_variance;
    for (Eigen::Index k = 0; k < rows; ++k) z(k, c) -= pi.pi[d.units[k]] * r_hat;
  }

  CovarianceEstimate out;
  out.kind = EstimatorKind::kHajek;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.matrix = weighted_gram(std::move(z), pi, d, n_hat > 0.0 ? n_hat : 1.0);
  return out;
}

namespace {

// Per-draw quantities of the limit covariance: pi = theta w_theta / E w and
// u_f = f - R(f) pi.
struct LimitTerms {
  std::vector<double> pi;
  std::vector<double> odds_inv;  // (1 - pi) / pi
  double r_denominator = 0.0;
};

LimitTerms limit_terms(const ModelDraws& draws, double theta) {
  if (draws.y.size() != draws.w.size() || draws.y.empty()) {
    throw InvalidArgument("limit covariance: draws must be non-empty and aligned");
  }
  if (!(theta > 0.0)) throw InvalidArgument("limit covariance: theta must be positive");
  const double count = static_cast<double>(draws.w.size());
  const double mean_w = std::accumulate(draws.w.begin(), draws.w.end(), 0.0) / count;

  LimitTerms t;
  t.pi.resize(draws.w.size());
  t.odds_inv.resize(draws.w.size());
  for (std::size_t i = 0; i < draws.w.size(); ++i) {
    const double p = theta * truncated_weight(draws.w[i], theta, mean_w) / mean_w;
    t.pi[i] = p;
    t.odds_inv[i] = (1.0 - p) / p;
    t.r_denominator += p * (1.0 - p);
  }
  t.r_denominator /= count;
  return t;
}

std::vector<double> projected(const UnitFunction& f, const ModelDraws& draws,
                              const LimitTerms& t, double* mean_f) {
  const std::size_t m = draws.y.size();
  std::vector<double> values(m);
  double num = 0.0, total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    values[i] = f(draws.y[i]);
    num += values[i] * (1.0 - t.pi[i]);
    total += values[i];
  }
  const double count = static_cast<double>(m);
  const double r = t.r_denominator > 0.0 ? (num / count) / t.r_denominator : 0.0;
  for (std::size_t i = 0; i < m; ++i) values[i] -= r * t.pi[i];
  if (mean_f) *mean_f = total / count;
  return values;
}

MonteCarloValue weighted_mean(const std::vector<double>& u,
                              const std::vector<double>& v,
                              const LimitTerms& t) {
  const std::size_t m = u.size();
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double h = t.odds_inv[i] * u[i] * v[i];
    sum += h;
    sum_sq += h * h;
  }
  const double count = static_cast<double>(m);
  const double mean = sum / count;
  const double var = m > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0)) : 0.0;
  return {mean, std::sqrt(var / count)};
}

}  // namespace

MonteCarloValue limit_cov_ht(const UnitFunction& f, const UnitFunction& g,
                             const ModelDraws& draws, double theta) {
  const LimitTerms t = limit_terms(draws, theta);
  const std::vector<double> uf = projected(f, draws, t, nullptr);
  const std::vector<double> ug = projected(g, draws, t, nullptr);
  return weighted_mean(uf, ug, t);
}

MonteCarloValue limit_cov_hajek(const UnitFunction& f, const UnitFunction& g,
                                const ModelDraws& draws, double theta) {
  const LimitTerms t = limit_terms(draws, theta);
  const UnitFunction constant = [](double) { return 1.0; };
  double pf = 0.0, pg = 0.0;
  const std::vector<double> uf = projected(f, draws, t, &pf);
  const std::vector<double> ug = projected(g, draws, t, &pg);
  const std::vector<double> uc = projected(constant, draws, t, nullptr);

  const double value = weighted_mean(uf, ug, t).value -
                       pf * weighted_mean(uc, ug, t).value -
                       pg * weighted_mean(uf, uc, t).value +
                       pf * pg * weighted_mean(uc, uc, t).value;

  // By bilinearity the four terms are E[(u_f - Pf u_1)(u_g - Pg u_1) / odds].
  std::vector<double> cf(uf.size()), cg(ug.size());
  for (std::size_t i = 0; i < uf.size(); ++i) {
    cf[i] = uf[i] - pf * uc[i];
    cg[i] = ug[i] - pg * uc[i];
  }
  return {value, weighted_mean(cf, cg, t).std_error};
}

CholeskyFactor cholesky_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("cholesky_psd: matrix not square");
  const Eigen::Index r = m.rows();
  if (r == 0) return {Eigen::MatrixXd(0, 0), 0.0};
  if (m.cwiseAbs().maxCoeff() == 0.0) return {Eigen::MatrixXd::Zero(r, r), 0.0};

  const double scale = m.trace() / static_cast<double>(r);
  constexpr std::array<double, 4> kLadder{0.0, 1e-12, 1e-10, 1e-8};
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);
  for (double step : kLadder) {
    const double eps = step * std::max(scale, 0.0);
    if (step > 0.0 && !(eps > 0.0)) break;
    Eigen::LLT<Eigen::MatrixXd> llt(m + eps * identity);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite()) continue;
    return {std::move(lower), eps};
  }
  throw InternalError("cholesky_psd: factorization failed at maximum jitter");
}

Eigen::MatrixXd standard_normal_draws(Eigen::Index r, int b, RngStream& rng) {
  Eigen::MatrixXd z(r, b);
  for (int col = 0; col < b; ++col) {
    for (Eigen::Index row = 0; row < r; ++row) z(row, col) = rng.normal();
  }
  return z;
}

std::vector<double> sorted_sup_norms(const Eigen::MatrixXd& lower,
                                     const Eigen::MatrixXd& z) {
  if (lower.cols() != z.rows()) throw InvalidArgument("sorted_sup_norms: shape mismatch");
  std::vector<double> sups(static_cast<std::size_t>(z.cols()), 0.0);
  if (lower.rows() > 0) {
    const Eigen::MatrixXd g = lower.triangularView<Eigen::Lower>() * z;
    const Eigen::RowVectorXd m = g.cwiseAbs().colwise().maxCoeff();
    for (Eigen::Index c = 0; c < m.size(); ++c) sups[c] = m[c];
  }
  std::sort(sups.begin(), sups.end());
  return sups;
}

double order_statistic_quantile(std::span<const double> sorted, double gamma) {
  if (sorted.empty()) throw InvalidArgument("order_statistic_quantile: no draws");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("order_statistic_quantile: gamma must lie in (0, 1)");
  }
  const double b = static_cast<double>(sorted.size());
  // The small offset keeps gamma * B from rounding up past an integer.
  auto index = static_cast<std::size_t>(std::ceil(gamma * b - 1e-9));
  index = std::clamp<std::size_t>(index, 1, sorted.size());
  return sorted[index - 1];
}

QuantileEstimate simulate_sup_quantile(const Eigen::MatrixXd& lower,
                                       double gamma, int b_prime,
                                       RngStream& rng) {
  if (b_prime < 100) throw InvalidArgument("simulate_sup_quantile: B' must be >= 100");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("simulate_sup_quantile: gamma must lie in (0, 1)");
  }
  const Eigen::MatrixXd z = standard_normal_draws(lower.cols(), b_prime, rng);
  const std::vector<double> sups = sorted_sup_norms(lower, z);
  return {gamma, order_statistic_quantile(sups, gamma), b_prime};
}

ConfidenceBand build_band(const ThresholdGrid& grid,
                          std::span<const double> center,
                          const QuantileEstimate& q,
                          std::size_t population_size) {
  if (center.size() != grid.t.size()) throw InvalidArgument("build_band: length mismatch");
  if (!(q.q_hat >= 0.0)) throw InvalidArgument("build_band: q_hat must be >= 0");
  if (population_size == 0) throw InvalidArgument("build_band: empty population");

  ConfidenceBand band;
  band.gamma = q.gamma;
  band.halfwidth = q.q_hat / std::sqrt(static_cast<double>(population_size));
  band.t = grid.t;
  band.center.assign(center.begin(), center.end());
  band.lower.resize(center.size());
  band.upper.resize(center.size());
  for (std::size_t j = 0; j < center.size(); ++j) {
    band.lower[j] = std::clamp(center[j] - band.halfwidth, 0.0, 1.0);
    band.upper[j] = std::clamp(center[j] + band.halfwidth, 0.0, 1.0);
  }
  return band;
}

bool coverage_check(double sup_stat, const QuantileEstimate& q) {
  return sup_stat <= q.q_hat;
}

}  // namespace cpsband
