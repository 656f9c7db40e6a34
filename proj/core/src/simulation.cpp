#include "cpsband/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "cpsband/design.hpp"
#include "cpsband/empirical_process.hpp"
#include "cpsband/error.hpp"
#include "cpsband/inference.hpp"
#include "cpsband/population_model.hpp"

namespace cpsband {

namespace {

// Substream indices under a replication's stream.
constexpr std::uint64_t kPopulationStream = 0;
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kGaussianStream = 2;

}  // namespace

int SimConfig::sample_size() const {
  return static_cast<int>(std::lround(alpha * static_cast<double>(population_size)));
}

void SimConfig::validate() const {
  if (population_size < 2) throw InvalidArgument("SimConfig: N must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("SimConfig: alpha must lie in (0, 1)");
  }
  if (sample_size() < 1) throw InvalidArgument("SimConfig: round(alpha N) must be >= 1");
  if (replications < 1) throw InvalidArgument("SimConfig: B must be >= 1");
  if (b_prime < 100) throw InvalidArgument("SimConfig: B' must be >= 100");
  if (threads < 1) throw InvalidArgument("SimConfig: threads must be >= 1");
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("SimConfig: gammas must lie in (0, 1)");
  }
}

ReplicationRecord run_replication(const SimConfig& config, int rep_index) {
  const RngStream stream =
      RngStream(config.master_seed).substream(static_cast<std::uint64_t>(rep_index));
  RngStream pop_rng = stream.substream(kPopulationStream);
  RngStream design_rng = stream.substream(kDesignStream);
  RngStream gauss_rng = stream.substream(kGaussianStream);

  ReplicationRecord rec;
  rec.index = rep_index;
  rec.sample_size = config.sample_size();
  rec.q_ht.assign(config.gammas.size(), 0.0);
  rec.q_hajek.assign(config.gammas.size(), 0.0);

  try {
    const PopulationFrame pop = generate_population(config.population_size, pop_rng);
    const InclusionProbabilities pi =
        config.inclusion == InclusionDesign::kEqual
            ? compute_pips_probabilities(std::vector<double>(pop.size(), 1.0),
                                         rec.sample_size)
            : compute_pips_probabilities(pop.x, rec.sample_size);
    // A census has no sampling error: both sups and quantiles are zero.
    if (std::all_of(pi.pi.begin(), pi.pi.end(), [](double p) { return p >= 1.0; })) {
      return rec;
    }

    const CanonicalPoissonParams p = poisson_from_cps_inclusion(pi);
    const SampleIndicators s = cps_sample(p, design_rng, config.sampler);

    const ThresholdGrid grid = ThresholdGrid::from_values(pop.y);
    rec.sup_ht = sup_norm_cdf(htep_evaluate(pop, pi, s, grid));
    rec.sup_hajek = sup_norm_cdf(hajek_evaluate(pop, pi, s, grid));

    const std::vector<double> thresholds = sampled_thresholds(pop, s);
    const CholeskyFactor l = cholesky_psd(estimate_cov_ht(pop, pi, s, thresholds).matrix);
    const CholeskyFactor h =
        cholesky_psd(estimate_cov_hajek(pop, pi, s, thresholds).matrix);
    rec.jitter_ht = l.jitter;
    rec.jitter_hajek = h.jitter;

    // One set of Gaussian vectors feeds both limit processes and every level.
    const Eigen::MatrixXd z = standard_normal_draws(
        static_cast<Eigen::Index>(thresholds.size()), config.b_prime, gauss_rng);
    const std::vector<double> sup_l = sorted_sup_norms(l.lower, z);
    const std::vector<double> sup_h = sorted_sup_norms(h.lower, z);
    for (std::size_t g = 0; g < config.gammas.size(); ++g) {
      rec.q_ht[g] = order_statistic_quantile(sup_l, config.gammas[g]);
      rec.q_hajek[g] = order_statistic_quantile(sup_h, config.gammas[g]);
    }
  } catch (const std::exception& e) {
    throw Error("replication " + std::to_string(rep_index) + " (master seed " +
                std::to_string(config.master_seed) + "): " + e.what());
  }
  return rec;
}

CoverageReport aggregate_records(const SimConfig& config,
                                 const std::vector<ReplicationRecord>& records) {
  CoverageReport report;
  report.config = config;
  const double root_n = std::sqrt(static_cast<double>(config.population_size));
  auto summarize = [&](bool hajek) {
    std::vector<CoverageCell> cells;
    for (std::size_t g = 0; g < config.gammas.size(); ++g) {
      CoverageCell cell;
      cell.gamma = config.gammas[g];
      double covered = 0.0, width_sum = 0.0, width_max = 0.0;
      for (const auto& r : records) {
        const double q = hajek ? r.q_hajek[g] : r.q_ht[g];
        const double sup = hajek ? r.sup_hajek : r.sup_ht;
        covered += sup <= q ? 1.0 : 0.0;
        const double width = 2.0 * q / root_n;
        width_sum += width;
        width_max = std::max(width_max, width);
      }
      const double b = static_cast<double>(records.size());
      cell.coverage = records.empty() ? 0.0 : covered / b;
      cell.average_width = records.empty() ? 0.0 : width_sum / b;
      cell.max_width = width_max;
      cells.push_back(cell);
    }
    return cells;
  };
  report.ht = summarize(false);
  report.hajek = summarize(true);
  return report;
}

CoverageReport run_experiment(const SimConfig& config,
                              std::vector<ReplicationRecord>* records_out) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(config.replications));
  std::atomic<int> next{0};
  std::mutex failure_mutex;
  int failed_index = std::numeric_limits<int>::max();
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= config.replications) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure && b > failed_index) return;
      }
      try {
        records[static_cast<std::size_t>(b)] = run_replication(config, b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        // Keep the lowest failing index so the reported failure is stable.
        if (b < failed_index) {
          failed_index = b;
          failure = std::current_exception();
        }
      }
    }
  };

  const int workers = std::min(config.threads, config.replications);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  CoverageReport report = aggregate_records(config, records);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (records_out) *records_out = std::move(records);
  return report;
}

}  // namespace cpsband
