#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cpsband/error.hpp"
#include "cpsband/population_model.hpp"
#include "cpsband/report.hpp"
#include "cpsband/rng.hpp"
#include "cpsband/simulation.hpp"

namespace cpsband {
namespace {

SimConfig small_config() {
  SimConfig c;
  c.population_size = 120;
  c.alpha = 0.1;
  c.replications = 24;
  c.b_prime = 200;
  c.master_seed = 77;
  return c;
}

TEST(PopulationModel, LognormalMoments) {
  RngStream rng(1);
  const auto pop = generate_population(1000000, rng);
  const double m = static_cast<double>(pop.size());
  double sx = 0.0, sy = 0.0, sl = 0.0, sl2 = 0.0, sx2 = 0.0, sy2 = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double l = std::log(pop.x[i]);
    sx += pop.x[i];
    sx2 += pop.x[i] * pop.x[i];
    sy += pop.y[i];
    sy2 += pop.y[i] * pop.y[i];
    sl += l;
    sl2 += l * l;
  }
  const double mean_x = sx / m, mean_y = sy / m, mean_l = sl / m;
  const double var_x = sx2 / m - mean_x * mean_x;
  const double var_y = sy2 / m - mean_y * mean_y;
  const double var_l = sl2 / m - mean_l * mean_l;
  EXPECT_NEAR(mean_x, std::exp(0.5), 4.0 * std::sqrt(var_x / m));
  EXPECT_NEAR(mean_y, std::exp(0.5), 4.0 * std::sqrt(var_y / m));
  // Var of the sample variance of a normal is 2 sigma^4 / m.
  EXPECT_NEAR(var_l, 1.0, 4.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(mean_l, 0.0, 4.0 / std::sqrt(m));
  EXPECT_THROW(generate_population(1, rng), InvalidArgument);
}

TEST(PopulationModel, ModelDrawsUseSizeAsWeight) {
  RngStream rng(2);
  const auto draws = generate_model_draws(1000, rng);
  ASSERT_EQ(draws.y.size(), 1000u);
  for (double w : draws.w) EXPECT_GT(w, 0.0);
}

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_EQ(c.sample_size(), 50);
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SimConfig{};
  c.population_size = 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SimConfig{};
  c.gammas = {0.5, 1.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SimConfig{};
  c.replications = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Replication, DeterministicForSeed) {
  const auto c = small_config();
  const auto a = run_replication(c, 3);
  const auto b = run_replication(c, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.sample_size, 12);
  EXPECT_EQ(a.q_ht.size(), 3u);
  EXPECT_NE(a, run_replication(c, 4));
  for (std::size_t g = 1; g < a.q_ht.size(); ++g) {
    EXPECT_GE(a.q_ht[g], a.q_ht[g - 1]);
    EXPECT_GE(a.q_hajek[g], a.q_hajek[g - 1]);
  }
  EXPECT_GT(a.sup_ht, 0.0);
}

TEST(Replication, CensusIsAlwaysCovered) {
  SimConfig c = small_config();
  c.population_size = 20;
  c.alpha = 0.99;  // round(19.8) = 20 = N
  c.replications = 1;
  const auto rec = run_replication(c, 0);
  EXPECT_EQ(rec.sup_ht, 0.0);
  EXPECT_EQ(rec.sup_hajek, 0.0);
  const auto report = run_experiment(c);
  for (const auto& cell : report.ht) EXPECT_EQ(cell.coverage, 1.0);
  for (const auto& cell : report.hajek) EXPECT_EQ(cell.coverage, 1.0);
}

TEST(Replication, EqualInclusionMakesEstimatorsCoincide) {
  SimConfig c = small_config();
  c.inclusion = InclusionDesign::kEqual;
  const auto rec = run_replication(c, 1);
  // With pi = n / N and fixed n, Nhat = N and the two processes agree.
  EXPECT_NEAR(rec.sup_ht, rec.sup_hajek, 1e-12);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  SimConfig c = small_config();
  std::vector<ReplicationRecord> r1, r4;
  c.threads = 1;
  const auto a = run_experiment(c, &r1);
  c.threads = 4;
  const auto b = run_experiment(c, &r4);
  EXPECT_EQ(r1, r4);
  const std::vector<CoverageReport> ra{a}, rb{b};
  EXPECT_EQ(format_report_text(ra), format_report_text(rb));
  EXPECT_EQ(format_report_csv(ra), format_report_csv(rb));
}

TEST(Experiment, AggregationInvariants) {
  const auto c = small_config();
  std::vector<ReplicationRecord> records;
  const auto report = run_experiment(c, &records);
  ASSERT_EQ(records.size(), 24u);
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i].index, static_cast<int>(i));
  for (const auto* cells : {&report.ht, &report.hajek}) {
    ASSERT_EQ(cells->size(), 3u);
    for (const auto& cell : *cells) {
      EXPECT_GE(cell.coverage, 0.0);
      EXPECT_LE(cell.coverage, 1.0);
      EXPECT_GE(cell.max_width, cell.average_width);
    }
  }
  // Coverage is the fraction of sup <= q over replications.
  int covered = 0;
  for (const auto& r : records) covered += r.sup_ht <= r.q_ht[1] ? 1 : 0;
  EXPECT_DOUBLE_EQ(report.ht[1].coverage, covered / 24.0);
}

TEST(Experiment, FailureCarriesReplicationIndex) {
  SimConfig c = small_config();
  c.gammas = {0.9, 1.0};
  EXPECT_THROW(run_experiment(c), InvalidArgument);
  try {
    run_replication(c, 5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("replication 5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos);
  }
}

TEST(Report, TextLayout) {
  SimConfig c = small_config();
  c.replications = 8;
  const std::vector<CoverageReport> reports{run_experiment(c)};
  const std::string text = format_report_text(reports);
  EXPECT_NE(text.find("gamma=0.90"), std::string::npos);
  EXPECT_NE(text.find("gamma=0.95"), std::string::npos);
  EXPECT_NE(text.find("gamma=0.99"), std::string::npos);
  EXPECT_NE(text.find("N=120"), std::string::npos);
  EXPECT_NE(text.find("alpha=0.10"), std::string::npos);
  EXPECT_NE(text.find("HTEP"), std::string::npos);
  EXPECT_NE(text.find("HEP"), std::string::npos);
  EXPECT_NE(text.find("; "), std::string::npos);
}

TEST(Report, EmptyGammasGiveHeaderOnly) {
  SimConfig c = small_config();
  c.gammas.clear();
  CoverageReport r;
  r.config = c;
  const std::vector<CoverageReport> reports{r};
  const std::string text = format_report_text(reports);
  EXPECT_EQ(text.find("gamma="), std::string::npos);
  EXPECT_EQ(text.find("alpha="), std::string::npos);
  EXPECT_FALSE(text.empty());
  const auto rows = parse_report_csv(format_report_csv(reports));
  EXPECT_TRUE(rows.empty());
}

TEST(Report, CsvRoundTrip) {
  SimConfig c = small_config();
  c.gammas = {0.95};
  CoverageReport r;
  r.config = c;
  r.ht = {{0.95, 0.913, 0.3378123456789, 0.361}};
  r.hajek = {{0.95, 0.925, 0.3418, 0.3652}};
  const std::vector<CoverageReport> reports{r};
  const auto rows = parse_report_csv(format_report_csv(reports));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].estimator, "HTEP");
  EXPECT_EQ(rows[1].estimator, "HEP");
  EXPECT_EQ(rows[0].population_size, 120u);
  EXPECT_EQ(rows[0].alpha, 0.1);
  EXPECT_EQ(rows[0].sample_size, 12);
  EXPECT_EQ(rows[0].replications, 24);
  EXPECT_EQ(rows[0].b_prime, 200);
  EXPECT_EQ(rows[0].seed, 77u);
  EXPECT_EQ(rows[0].gamma, 0.95);
  EXPECT_EQ(rows[0].coverage, 0.913);
  EXPECT_EQ(rows[0].average_width, 0.3378123456789);
  EXPECT_EQ(rows[1].max_width, 0.3652);
  EXPECT_THROW(parse_report_csv("bad,header\n1,2\n"), InvalidArgument);
}

TEST(Report, ReplicationsCsv) {
  const auto c = small_config();
  std::vector<ReplicationRecord> records;
  run_experiment(c, &records);
  const std::string csv = format_replications_csv(c, records);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), records.size() + 1);
}

}  // namespace
}  // namespace cpsband
