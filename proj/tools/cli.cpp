#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpsband/design.hpp"
#include "cpsband/empirical_process.hpp"
#include "cpsband/error.hpp"
#include "cpsband/inference.hpp"
#include "cpsband/oracle.hpp"
#include "cpsband/report.hpp"
#include "cpsband/samplers.hpp"
#include "csv.hpp"

namespace cpsband::cli {

namespace {

constexpr const char* kThreadsEnv = "CPSBAND_THREADS";

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  const int len = std::snprintf(nullptr, 0, f, args...);
  std::string s(static_cast<std::size_t>(len), '\0');
  std::snprintf(s.data(), s.size() + 1, f, args...);
  return s;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

SamplerKind parse_sampler(const std::string& name) {
  if (name == "sequential") return SamplerKind::kSequential;
  if (name == "rejection") return SamplerKind::kRejection;
  throw InvalidArgument("unknown sampler '" + name + "' (expected sequential or rejection)");
}

const char* sampler_name(SamplerKind kind) {
  return kind == SamplerKind::kRejection ? "rejection" : "sequential";
}

InclusionDesign parse_inclusion(const std::string& name) {
  if (name == "pips") return InclusionDesign::kProportional;
  if (name == "equal") return InclusionDesign::kEqual;
  throw InvalidArgument("unknown inclusion design '" + name + "' (expected pips or equal)");
}

const char* inclusion_name(InclusionDesign d) {
  return d == InclusionDesign::kEqual ? "equal" : "pips";
}

// --threads wins, then the environment, then the fallback.
int resolve_threads(const std::optional<int>& flag, int fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw InvalidArgument(std::string(kThreadsEnv) + " must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return fallback;
}

PopulationFrame read_population(const std::string& path, bool need_y) {
  const CsvTable table = CsvTable::read(path);
  PopulationFrame pop;
  pop.x = table.numeric_column("x");
  if (need_y || table.has_column("y")) {
    pop.y = table.numeric_column("y");
  } else {
    pop.y.assign(pop.x.size(), 0.0);
  }
  if (table.has_column("unit")) {
    const std::vector<long long> unit = table.integer_column("unit");
    for (std::size_t i = 0; i < unit.size(); ++i) {
      if (unit[i] != static_cast<long long>(i + 1)) {
        throw InvalidArgument(path + ": units must be numbered 1..N in order");
      }
    }
  }
  pop.validate();
  return pop;
}

SampleIndicators read_sample(const std::string& path, std::size_t units) {
  const CsvTable table = CsvTable::read(path);
  const std::vector<long long> unit = table.integer_column("unit");
  const std::vector<long long> s = table.integer_column("s");
  SampleIndicators out;
  out.s.assign(units, 0);
  std::vector<bool> seen(units, false);
  for (std::size_t r = 0; r < unit.size(); ++r) {
    if (unit[r] < 1 || static_cast<std::size_t>(unit[r]) > units) {
      throw InvalidArgument(path + ": unit " + std::to_string(unit[r]) + " out of range");
    }
    if (s[r] != 0 && s[r] != 1) throw InvalidArgument(path + ": s must be 0 or 1");
    const auto idx = static_cast<std::size_t>(unit[r] - 1);
    if (seen[idx]) throw InvalidArgument(path + ": duplicate unit " + std::to_string(unit[r]));
    seen[idx] = true;
    out.s[idx] = static_cast<std::uint8_t>(s[r]);
    out.count += static_cast<int>(s[r]);
  }
  if (out.count < 1) throw InvalidArgument(path + ": sample is empty");
  return out;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string input;
  int n = 0;
  std::string out;
};

int do_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& log) {
  const PopulationFrame pop = read_population(a.input, false);
  const InclusionProbabilities pi = compute_pips_probabilities(pop.x, a.n);
  const CanonicalPoissonParams p = poisson_from_cps_inclusion(pi);
  std::string csv = "unit,x,pi,p\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    csv += fmt("%zu,%.17g,%.17g,%.17g\n", i + 1, pop.x[i], pi.pi[i], p.p[i]);
  }
  emit(a.out, csv, out);
  const double sum_pi = std::accumulate(pi.pi.begin(), pi.pi.end(), 0.0);
  const double sum_p = std::accumulate(p.p.begin(), p.p.end(), 0.0);
  log << fmt("[cpsband] calibrate: input=%s N=%zu n=%d sum_pi=%.12f sum_p=%.12f\n",
             a.input.c_str(), pop.size(), a.n, sum_pi, sum_p);
  return 0;
}

// ------------------------------------------------------------------- sample

struct SampleArgs {
  std::string population;
  int n = 0;
  std::uint64_t seed = 1;
  std::uint64_t replication = 0;
  std::string sampler = "sequential";
  std::string out;
};

int do_sample(const SampleArgs& a, std::ostream& out, std::ostream& log) {
  const SamplerKind kind = parse_sampler(a.sampler);
  const PopulationFrame pop = read_population(a.population, false);
  const InclusionProbabilities pi = compute_pips_probabilities(pop.x, a.n);
  const CanonicalPoissonParams p = poisson_from_cps_inclusion(pi);
  RngStream rng = RngStream(a.seed).substream(a.replication);
  const SampleIndicators s = cps_sample(p, rng, kind);
  std::string csv = "unit,x,pi,s\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    csv += fmt("%zu,%.17g,%.17g,%d\n", i + 1, pop.x[i], pi.pi[i], static_cast<int>(s.s[i]));
  }
  emit(a.out, csv, out);
  log << fmt("[cpsband] sample: population=%s N=%zu n=%d sampler=%s seed=%llu replication=%llu\n",
             a.population.c_str(), pop.size(), a.n, sampler_name(kind),
             static_cast<unsigned long long>(a.seed),
             static_cast<unsigned long long>(a.replication));
  return 0;
}

// --------------------------------------------------------------------- band

struct BandArgs {
  std::string population;
  std::string sample;
  std::string estimator = "ht";
  double gamma = 0.95;
  int b_prime = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string process_out;
};

int do_band(const BandArgs& a, std::ostream& out, std::ostream& log) {
  if (a.estimator != "ht" && a.estimator != "hajek") {
    throw InvalidArgument("unknown estimator '" + a.estimator + "' (expected ht or hajek)");
  }
  const bool hajek = a.estimator == "hajek";
  const PopulationFrame pop = read_population(a.population, true);
  const SampleIndicators s = read_sample(a.sample, pop.size());
  const InclusionProbabilities pi = compute_pips_probabilities(pop.x, s.count);

  const ThresholdGrid grid = ThresholdGrid::from_values(pop.y);
  const ProcessEvaluation ev =
      hajek ? hajek_evaluate(pop, pi, s, grid) : htep_evaluate(pop, pi, s, grid);
  const double sup = sup_norm_cdf(ev);

  const std::vector<double> thresholds = sampled_thresholds(pop, s);
  QuantileEstimate q{a.gamma, 0.0, a.b_prime};
  double jitter = 0.0;
  const bool census =
      std::all_of(pi.pi.begin(), pi.pi.end(), [](double v) { return v >= 1.0; });
  if (!census) {
    const CovarianceEstimate cov = hajek ? estimate_cov_hajek(pop, pi, s, thresholds)
                                         : estimate_cov_ht(pop, pi, s, thresholds);
    const CholeskyFactor l = cholesky_psd(cov.matrix);
    jitter = l.jitter;
    RngStream rng(a.seed);
    q = simulate_sup_quantile(l.lower, a.gamma, a.b_prime, rng);
  } else if (!(a.gamma > 0.0 && a.gamma < 1.0)) {
    throw InvalidArgument("gamma must lie in (0, 1)");
  }

  const std::vector<double> center = cdf_estimate(
      pop, pi, s, grid, hajek ? ProcessKind::kHajek : ProcessKind::kHorvitzThompson);
  const ConfidenceBand band = build_band(grid, center, q, pop.size());

  std::string csv = "t,center,lower,upper\n";
  for (std::size_t j = 0; j < band.t.size(); ++j) {
    csv += fmt("%.17g,%.17g,%.17g,%.17g\n", band.t[j], band.center[j], band.lower[j],
               band.upper[j]);
  }
  write_file_atomic(a.out, csv);
  if (!a.process_out.empty()) {
    std::string pcsv = "t,value,value_left\n";
    for (std::size_t j = 0; j < grid.t.size(); ++j) {
      pcsv += fmt("%.17g,%.17g,%.17g\n", grid.t[j], ev.values[j], ev.values_left[j]);
    }
    pcsv += fmt("# sup,%.17g\n", sup);
    write_file_atomic(a.process_out, pcsv);
  }
  log << fmt("[cpsband] band: population=%s sample=%s estimator=%s gamma=%.4f B'=%d seed=%llu\n",
             a.population.c_str(), a.sample.c_str(), hajek ? "HEP" : "HTEP", a.gamma,
             a.b_prime, static_cast<unsigned long long>(a.seed));
  out << fmt("estimator=%s sup=%.10f q_hat=%.10f halfwidth=%.10f width=%.10f jitter=%.3g covered=%s\n",
             hajek ? "HEP" : "HTEP", sup, q.q_hat, band.halfwidth, band.width(), jitter,
             coverage_check(sup, q) ? "true" : "false");
  return 0;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> replications;
  std::optional<int> b_prime;
  std::optional<std::string> sampler;
  std::optional<std::string> inclusion;
  std::string out;
  std::string csv;
  std::string replications_csv;
};

int do_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& log) {
  std::vector<SimConfig> configs =
      a.config.empty() ? std::vector<SimConfig>{SimConfig{}} : parse_sim_config(read_file(a.config));
  for (SimConfig& c : configs) {
    if (a.seed) c.master_seed = *a.seed;
    if (a.replications) c.replications = *a.replications;
    if (a.b_prime) c.b_prime = *a.b_prime;
    if (a.sampler) c.sampler = parse_sampler(*a.sampler);
    if (a.inclusion) c.inclusion = parse_inclusion(*a.inclusion);
    c.threads = resolve_threads(a.threads, c.threads);
    c.validate();
  }
  if (!a.replications_csv.empty() && configs.size() != 1) {
    throw InvalidArgument("--replications-csv needs a config with a single (N, alpha)");
  }

  std::vector<CoverageReport> reports;
  std::vector<ReplicationRecord> records;
  for (const SimConfig& c : configs) {
    std::string gammas;
    for (double g : c.gammas) gammas += fmt("%s%.4g", gammas.empty() ? "" : ",", g);
    log << fmt("[cpsband] simulate: N=%zu alpha=%.4g n=%d B=%d B'=%d gammas=%s sampler=%s inclusion=%s seed=%llu threads=%d\n",
               c.population_size, c.alpha, c.sample_size(), c.replications, c.b_prime,
               gammas.c_str(), sampler_name(c.sampler), inclusion_name(c.inclusion),
               static_cast<unsigned long long>(c.master_seed), c.threads);
    reports.push_back(run_experiment(c, a.replications_csv.empty() ? nullptr : &records));
    log << fmt("[cpsband] simulate: N=%zu alpha=%.4g done in %.2f s\n", c.population_size,
               c.alpha, reports.back().runtime_seconds);
  }
  emit(a.out, format_report_text(reports), out);
  if (!a.csv.empty()) write_file_atomic(a.csv, format_report_csv(reports));
  if (!a.replications_csv.empty()) {
    write_file_atomic(a.replications_csv, format_replications_csv(configs.front(), records));
  }
  return 0;
}

}  // namespace

// ------------------------------------------------------------------- config

std::vector<SimConfig> parse_sim_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");

  static const std::vector<std::string> kKeys{"N", "alpha", "B", "gammas", "B_prime",
                                               "master_seed", "sampler", "inclusion",
                                               "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
  }

  try {
    auto as_list = [&](const char* key, auto fallback) {
      using T = decltype(fallback);
      std::vector<T> out;
      if (!j.contains(key)) return std::vector<T>{fallback};
      if (j[key].is_array()) {
        for (const auto& v : j[key]) out.push_back(v.get<T>());
      } else {
        out.push_back(j[key].get<T>());
      }
      if (out.empty()) throw InvalidArgument(std::string("config: '") + key + "' is empty");
      return out;
    };

    SimConfig base;
    if (j.contains("B")) base.replications = j["B"].get<int>();
    if (j.contains("gammas")) base.gammas = j["gammas"].get<std::vector<double>>();
    if (j.contains("B_prime")) base.b_prime = j["B_prime"].get<int>();
    if (j.contains("master_seed")) base.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("sampler")) base.sampler = parse_sampler(j["sampler"].get<std::string>());
    if (j.contains("inclusion")) {
      base.inclusion = parse_inclusion(j["inclusion"].get<std::string>());
    }
    if (j.contains("threads")) base.threads = j["threads"].get<int>();

    std::vector<SimConfig> out;
    for (std::size_t n : as_list("N", base.population_size)) {
      for (double alpha : as_list("alpha", base.alpha)) {
        SimConfig c = base;
        c.population_size = n;
        c.alpha = alpha;
        c.validate();
        out.push_back(c);
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

// ------------------------------------------------------------- oracle-check

int run_oracle_suite(std::uint64_t seed, int instances, std::ostream& out) {
  int failures = 0, checks = 0;
  auto report = [&](const char* name, int instance, std::size_t units, int n, double err,
                    double tol) {
    const bool ok = err <= tol;
    ++checks;
    if (!ok) ++failures;
    out << fmt("%s %-22s instance=%d seed=%llu N=%zu n=%d err=%.3e tol=%.0e\n",
               ok ? "PASS" : "FAIL", name, instance, static_cast<unsigned long long>(seed),
               units, n, err, tol);
  };

  const RngStream master(seed);
  for (int inst = 0; inst < instances; ++inst) {
    RngStream rng = master.substream(static_cast<std::uint64_t>(inst));
    const std::size_t units = 2 + static_cast<std::size_t>(rng.uniform() * 7.0);  // 2..8
    const int n = 1 + static_cast<int>(rng.uniform() * static_cast<double>(units - 1));
    PoissonParams params{std::vector<double>(units), n};
    std::vector<double> y(units);
    for (std::size_t i = 0; i < units; ++i) {
      params.p[i] = 0.05 + 0.9 * rng.uniform();
      y[i] = rng.normal();
    }

    const DesignDistribution cps = enumerate_cps_distribution(params);
    const InclusionOrders exact = exact_inclusion_orders(cps);
    const InclusionProbabilities forward = cps_inclusion_from_poisson(params);
    double err = 0.0;
    for (std::size_t i = 0; i < units; ++i) err = std::max(err, std::abs(forward.pi[i] - exact.first[i]));
    report("forward-map", inst, units, n, err, 1e-12);

    const CanonicalPoissonParams back = poisson_from_cps_inclusion(forward);
    const InclusionProbabilities again = cps_inclusion_from_poisson(back);
    err = 0.0;
    for (std::size_t i = 0; i < units; ++i) err = std::max(err, std::abs(again.pi[i] - forward.pi[i]));
    report("round-trip", inst, units, n, err, 1e-10);

    err = 0.0;
    for (std::size_t i = 0; i < units; ++i) {
      for (std::size_t k = 0; k < units; ++k) {
        if (i != k) err = std::max(err, exact.second(i, k) - exact.first[i] * exact.first[k]);
      }
    }
    report("negative-dependence", inst, units, n, std::max(err, 0.0), 1e-12);

    PopulationFrame pop{y, std::vector<double>(units, 1.0)};
    const ThresholdGrid grid = ThresholdGrid::from_values(y);
    std::vector<double> mean(grid.t.size(), 0.0);
    for (const auto& e : cps.samples) {
      const ProcessEvaluation ev = htep_evaluate(pop, forward, cps.indicators(e), grid);
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += e.probability * ev.values[j];
    }
    err = 0.0;
    for (double m : mean) err = std::max(err, std::abs(m));
    report("ht-unbiasedness", inst, units, n, err, 1e-12);

    err = 0.0;
    for (const auto& e : cps.samples) {
      const SampleIndicators s = cps.indicators(e);
      const ProcessEvaluation h = hajek_evaluate(pop, forward, s, grid);
      const ProcessEvaluation c = centered_process_evaluate(pop, forward, s, grid);
      const double ratio = static_cast<double>(units) / ht_population_size(forward, s);
      for (std::size_t j = 0; j < grid.t.size(); ++j) {
        err = std::max(err, std::abs(h.values[j] - ratio * c.values[j]));
      }
    }
    report("hajek-identity", inst, units, n, err, 1e-12);

    const DesignDistribution poisson = enumerate_poisson_distribution(params.p);
    const DesignMoments t_moments = exact_design_moments(
        poisson, [&](const SampleIndicators& s) { return projection_statistic_T(y, s, params); });
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(units);
    report("projection-mean", inst, units, n, std::abs(t_moments.mean - y_mean), 1e-12);
    report("projection-variance", inst, units, n,
           std::abs(static_cast<double>(units) * t_moments.variance -
                    poisson_projection_variance(y, params)),
           1e-12);

    int bad = 0;
    RngStream draw = rng.substream(1);
    for (int b = 0; b < 200; ++b) bad += cps_sample_sequential(params, draw).count != n;
    report("fixed-size", inst, units, n, bad, 0.0);
  }
  out << fmt("oracle-check: %d/%d checks passed (seed=%llu, instances=%d)\n", checks - failures,
             checks, static_cast<unsigned long long>(seed), instances);
  return failures;
}

// ----------------------------------------------------------------- dispatch

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional Poisson sampling designs and uniform CDF confidence bands"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "pips inclusion probabilities and canonical Poisson parameters");
  calibrate->add_option("--input,-i", cal.input, "CSV with columns unit,x (y optional)")->required();
  calibrate->add_option("--n", cal.n, "target sample size")->required();
  calibrate->add_option("--out,-o", cal.out, "output CSV (unit,x,pi,p); stdout if omitted");

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "draw one fixed-size CPS sample");
  sample->add_option("--population,-p", smp.population, "CSV with columns unit,x (y optional)")->required();
  sample->add_option("--n", smp.n, "sample size")->required();
  sample->add_option("--seed", smp.seed, "master seed");
  sample->add_option("--replication", smp.replication, "substream index under the master seed");
  sample->add_option("--sampler", smp.sampler, "sequential or rejection");
  sample->add_option("--out,-o", smp.out, "output CSV (unit,x,pi,s); stdout if omitted");

  BandArgs bnd;
  auto* band = app.add_subcommand("band", "uniform confidence band for the population CDF");
  band->add_option("--population,-p", bnd.population, "CSV with columns unit,y,x")->required();
  band->add_option("--sample,-s", bnd.sample, "CSV with columns unit,s")->required();
  band->add_option("--estimator", bnd.estimator, "ht or hajek");
  band->add_option("--gamma", bnd.gamma, "confidence level");
  band->add_option("--b-prime", bnd.b_prime, "Gaussian draws for the quantile");
  band->add_option("--seed", bnd.seed, "seed for the Gaussian draws");
  band->add_option("--out,-o", bnd.out, "band CSV (t,center,lower,upper)")->required();
  band->add_option("--process-out", bnd.process_out, "process CSV (t,value,value_left) with sup");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "coverage experiment over B replications");
  simulate->add_option("--config,-c", sim.config, "JSON config with SimConfig fields");
  simulate->add_option("--seed", sim.seed, "master seed (overrides config)");
  simulate->add_option("--threads", sim.threads,
                       std::string("worker threads (overrides config and ") + kThreadsEnv + ")");
  simulate->add_option("--replications,-B", sim.replications, "replications B (overrides config)");
  simulate->add_option("--b-prime", sim.b_prime, "Gaussian draws B' (overrides config)");
  simulate->add_option("--sampler", sim.sampler, "sequential or rejection (overrides config)");
  simulate->add_option("--inclusion", sim.inclusion, "pips or equal (overrides config)");
  simulate->add_option("--out,-o", sim.out, "report text; stdout if omitted");
  simulate->add_option("--csv", sim.csv, "report CSV");
  simulate->add_option("--replications-csv", sim.replications_csv, "per-replication CSV");

  std::uint64_t oracle_seed = 1;
  int oracle_instances = 50;
  auto* oracle = app.add_subcommand("oracle-check", "exact-enumeration property suite");
  oracle->add_option("--seed", oracle_seed, "seed for the random instances");
  oracle->add_option("--instances", oracle_instances, "number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "cpsband: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*calibrate) return do_calibrate(cal, out, err);
    if (*sample) return do_sample(smp, out, err);
    if (*band) return do_band(bnd, out, err);
    if (*simulate) return do_simulate(sim, out, err);
    if (*oracle) {
      if (oracle_instances < 1) throw InvalidArgument("--instances must be >= 1");
      err << fmt("[cpsband] oracle-check: seed=%llu instances=%d\n",
                 static_cast<unsigned long long>(oracle_seed), oracle_instances);
      return run_oracle_suite(oracle_seed, oracle_instances, out) == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "cpsband: error: " << msg << '\n';
    return 1;
  }
  return 1;
}

}  // namespace cpsband::cli
