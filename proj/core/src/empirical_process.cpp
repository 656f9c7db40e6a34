#include "cpsband/empirical_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpsband/error.hpp"

namespace cpsband {

namespace {

void check_lengths(const PopulationFrame& pop, const InclusionProbabilities& pi,
                   const SampleIndicators& s) {
  if (pop.y.size() != pi.pi.size() || pop.y.size() != s.s.size()) {
    throw InvalidArgument("population, inclusion probabilities and sample differ in length");
  }
  if (pop.y.empty()) throw InvalidArgument("empty population");
  for (double p : pi.pi) {
    if (!(p > 0.0)) throw InvalidArgument("inclusion probabilities must be positive");
  }
}

// Sums of per-unit weights over {y_i <= t} (at) and {y_i < t} (below) for
// every grid threshold.
struct GridSums {
  std::vector<double> at;
  std::vector<double> below;
};

GridSums grid_sums(std::span<const double> y, std::span<const double> weight,
                   const ThresholdGrid& grid) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  GridSums out;
  out.at.resize(grid.t.size());
  out.below.resize(grid.t.size());
  double running = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < grid.t.size(); ++j) {
    const double t = grid.t[j];
    while (k < order.size() && y[order[k]] < t) running += weight[order[k++]];
    out.below[j] = running;
    while (k < order.size() && y[order[k]] <= t) running += weight[order[k++]];
    out.at[j] = running;
  }
  return out;
}

}  // namespace

ThresholdGrid ThresholdGrid::from_values(std::span<const double> y) {
  ThresholdGrid grid;
  grid.t.assign(y.begin(), y.end());
  std::sort(grid.t.begin(), grid.t.end());
  grid.t.erase(std::unique(grid.t.begin(), grid.t.end()), grid.t.end());
  return grid;
}

double ht_population_size(const InclusionProbabilities& pi,
                          const SampleIndicators& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.s.size(); ++i) {
    if (s.s[i]) total += 1.0 / pi.pi[i];
  }
  return total;
}

std::vector<double> population_cdf(const PopulationFrame& pop,
                                   const ThresholdGrid& grid) {
  const std::vector<double> ones(pop.y.size(), 1.0 / pop.y.size());
  return grid_sums(pop.y, ones, grid).at;
}

std::vector<double> cdf_estimate(const PopulationFrame& pop,
                                 const InclusionProbabilities& pi,
                                 const SampleIndicators& s,
                                 const ThresholdGrid& grid, ProcessKind kind) {
  check_lengths(pop, pi, s);
  double norm = static_cast<double>(pop.y.size());
  if (kind == ProcessKind::kHajek) {
    norm = ht_population_size(pi, s);
    if (!(norm > 0.0)) throw InvalidArgument("cdf_estimate: Nhat == 0");
  }
  std::vector<double> weight(pop.y.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] = s.s[i] ? 1.0 / (pi.pi[i] * norm) : 0.0;
  }
  return grid_sums(pop.y, weight, grid).at;
}

ProcessEvaluation htep_evaluate(const PopulationFrame& pop,
                                const InclusionProbabilities& pi,
                                const SampleIndicators& s,
                                const ThresholdGrid& grid) {
  check_lengths(pop, pi, s);
  const double scale = 1.0 / std::sqrt(static_cast<double>(pop.y.size()));
  std::vector<double> weight(pop.y.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] = scale * ((s.s[i] ? 1.0 / pi.pi[i] : 0.0) - 1.0);
  }
  GridSums sums = grid_sums(pop.y, weight, grid);
  return {std::move(sums.at), std::move(sums.below), ProcessKind::kHorvitzThompson};
}

ProcessEvaluation hajek_evaluate(const PopulationFrame& pop,
                                 const InclusionProbabilities& pi,
                                 const SampleIndicators& s,
                                 const ThresholdGrid& grid) {
  check_lengths(pop, pi, s);
  const double n_hat = ht_population_size(pi, s);
  if (!(n_hat > 0.0)) {
    throw InvalidArgument("hajek_evaluate: Nhat == 0, Hajek process undefined");
  }
  const double size = static_cast<double>(pop.y.size());
  const double root = std::sqrt(size);
  // Per-unit weight (S_i / pi_i) / Nhat - 1 / N, times sqrt(N).
  std::vector<double> weight(pop.y.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double ht = s.s[i] ? 1.0 / pi.pi[i] : 0.0;
    weight[i] = root * (ht / n_hat - 1.0 / size);
  }
  GridSums sums = grid_sums(pop.y, weight, grid);
  return {std::move(sums.at), std::move(sums.below), ProcessKind::kHajek};
}

ProcessEvaluation centered_process_evaluate(const PopulationFrame& pop,
                                            const InclusionProbabilities& pi,
                                            const SampleIndicators& s,
                                            const ThresholdGrid& grid) {
  check_lengths(pop, pi, s);
  const double size = static_cast<double>(pop.y.size());
  std::vector<double> residual(pop.y.size());
  double total = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] = (s.s[i] ? 1.0 / pi.pi[i] : 0.0) - 1.0;
    total += residual[i];
  }
  const std::vector<double> ones(pop.y.size(), 1.0 / size);
  const GridSums sums = grid_sums(pop.y, residual, grid);
  const GridSums cdf = grid_sums(pop.y, ones, grid);

  const double scale = 1.0 / std::sqrt(size);
  ProcessEvaluation ev;
  ev.kind = ProcessKind::kCentered;
  ev.values.resize(grid.t.size());
  ev.values_left.resize(grid.t.size());
  for (std::size_t j = 0; j < grid.t.size(); ++j) {
    ev.values[j] = scale * (sums.at[j] - cdf.at[j] * total);
    ev.values_left[j] = scale * (sums.below[j] - cdf.below[j] * total);
  }
  return ev;
}

double sup_norm_cdf(const ProcessEvaluation& ev) {
  double sup = 0.0;
  for (double v : ev.values) sup = std::max(sup, std::abs(v));
  for (double v : ev.values_left) sup = std::max(sup, std::abs(v));
  return sup;
}

double projection_residual_R(std::span<const double> f,
                             const PoissonParams& params) {
  if (f.size() != params.p.size()) {
    throw InvalidArgument("projection_residual_R: length mismatch");
  }
  double d = 0.0, num = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = params.p[i];
    d += p * (1.0 - p);
    num += f[i] * (1.0 - p);
  }
  return d > 0.0 ? num / d : 0.0;
}

double projection_statistic_T(std::span<const double> f,
                              const SampleIndicators& s,
                              const PoissonParams& params) {
  if (f.size() != params.p.size() || s.s.size() != f.size()) {
    throw InvalidArgument("projection_statistic_T: length mismatch");
  }
  const double r = projection_residual_R(f, params);
  double ht = 0.0, size_dev = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (s.s[i]) ht += f[i] / params.p[i];
    size_dev += s.s[i] - params.p[i];
  }
  const double units = static_cast<double>(f.size());
  return ht / units - r / units * size_dev;
}

double poisson_projection_variance(std::span<const double> f,
                                   const PoissonParams& params) {
  if (f.size() != params.p.size()) {
    throw InvalidArgument("poisson_projection_variance: length mismatch");
  }
  const double r = projection_residual_R(f, params);
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = params.p[i];
    const double dev = f[i] - r * p;
    total += (1.0 - p) / p * dev * dev;
  }
  return total / static_cast<double>(f.size());
}

}  // namespace cpsband
