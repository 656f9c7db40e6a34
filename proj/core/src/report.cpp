#include "cpsband/report.hpp"

#include <cstdio>
#include <sstream>

#include "cpsband/error.hpp"

namespace cpsband {

namespace {

template <typename... Args>
std::string printf_string(const char* fmt, Args... args) {
  const int len = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<std::size_t>(len), '\0');
  std::snprintf(out.data(), out.size() + 1, fmt, args...);
  return out;
}

constexpr int kLabelWidth = 16;
constexpr int kColumnWidth = 19;

std::string pad(std::string s, int width) {
  if (static_cast<int>(s.size()) < width) s.append(width - s.size(), ' ');
  return s;
}

void append_table(std::string& out, const char* title,
                  std::span<const CoverageReport> reports, bool hajek) {
  out += title;
  out += '\n';
  const std::vector<double>& gammas = reports.front().config.gammas;
  std::string header = pad("", kLabelWidth);
  for (double g : gammas) header += pad(printf_string("gamma=%.2f", g), kColumnWidth);
  while (!header.empty() && header.back() == ' ') header.pop_back();
  out += header;
  out += '\n';
  if (gammas.empty()) return;

  std::size_t last_n = 0;
  for (const CoverageReport& r : reports) {
    if (r.config.population_size != last_n) {
      out += printf_string("N=%zu\n", r.config.population_size);
      last_n = r.config.population_size;
    }
    const std::vector<CoverageCell>& cells = hajek ? r.hajek : r.ht;
    std::string coverage = pad(printf_string("  alpha=%.2f", r.config.alpha), kLabelWidth);
    std::string widths = pad("", kLabelWidth);
    for (const CoverageCell& c : cells) {
      coverage += pad(printf_string("%.3f", c.coverage), kColumnWidth);
      widths += pad(printf_string("(%.4f; %.4f)", c.average_width, c.max_width),
                    kColumnWidth);
    }
    while (!coverage.empty() && coverage.back() == ' ') coverage.pop_back();
    while (!widths.empty() && widths.back() == ' ') widths.pop_back();
    out += coverage + '\n' + widths + '\n';
  }
}

const char* inclusion_name(InclusionDesign d) {
  return d == InclusionDesign::kEqual ? "equal" : "pips";
}

const char* sampler_name(SamplerKind kind) {
  return kind == SamplerKind::kRejection ? "rejection" : "sequential";
}

}  // namespace

std::string format_report_text(std::span<const CoverageReport> reports) {
  if (reports.empty()) return {};
  std::string out;
  append_table(out, "Horvitz-Thompson empirical process (HTEP): coverage, (average width; maximum width)",
               reports, false);
  out += '\n';
  append_table(out, "Hajek empirical process (HEP): coverage, (average width; maximum width)",
               reports, true);
  const SimConfig& c = reports.front().config;
  out += printf_string("\nB=%d  B'=%d  seed=%llu  sampler=%s  inclusion=%s\n", c.replications,
                       c.b_prime, static_cast<unsigned long long>(c.master_seed),
                       sampler_name(c.sampler), inclusion_name(c.inclusion));
  return out;
}

std::string format_report_csv(std::span<const CoverageReport> reports) {
  std::string out =
      "estimator,N,alpha,n,B,B_prime,seed,gamma,coverage,avg_width,max_width\n";
  for (const char* estimator : {"HTEP", "HEP"}) {
    const bool hajek = estimator[1] == 'E';
    for (const CoverageReport& r : reports) {
      const SimConfig& c = r.config;
      for (const CoverageCell& cell : hajek ? r.hajek : r.ht) {
        out += printf_string("%s,%zu,%.17g,%d,%d,%d,%llu,%.17g,%.17g,%.17g,%.17g\n",
                             estimator, c.population_size, c.alpha, c.sample_size(),
                             c.replications, c.b_prime,
                             static_cast<unsigned long long>(c.master_seed), cell.gamma,
                             cell.coverage, cell.average_width, cell.max_width);
      }
    }
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("estimator,N,alpha", 0) != 0) {
    throw InvalidArgument("parse_report_csv: missing header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 11) {
      throw InvalidArgument("parse_report_csv: expected 11 fields, got " +
                            std::to_string(fields.size()));
    }
    try {
      ReportRow row;
      row.estimator = fields[0];
      row.population_size = std::stoull(fields[1]);
      row.alpha = std::stod(fields[2]);
      row.sample_size = std::stoi(fields[3]);
      row.replications = std::stoi(fields[4]);
      row.b_prime = std::stoi(fields[5]);
      row.seed = std::stoull(fields[6]);
      row.gamma = std::stod(fields[7]);
      row.coverage = std::stod(fields[8]);
      row.average_width = std::stod(fields[9]);
      row.max_width = std::stod(fields[10]);
      rows.push_back(row);
    } catch (const std::logic_error&) {
      throw InvalidArgument("parse_report_csv: malformed row: " + line);
    }
  }
  return rows;
}

std::string format_replications_csv(const SimConfig& config,
                                    std::span<const ReplicationRecord> records) {
  std::string out = "rep,n,sup_htep,sup_hep";
  for (double g : config.gammas) out += printf_string(",q_htep_%.2f", g);
  for (double g : config.gammas) out += printf_string(",q_hep_%.2f", g);
  out += ",jitter_htep,jitter_hep\n";
  for (const ReplicationRecord& r : records) {
    out += printf_string("%d,%d,%.17g,%.17g", r.index, r.sample_size, r.sup_ht, r.sup_hajek);
    for (double q : r.q_ht) out += printf_string(",%.17g", q);
    for (double q : r.q_hajek) out += printf_string(",%.17g", q);
    out += printf_string(",%.17g,%.17g\n", r.jitter_ht, r.jitter_hajek);
  }
  return out;
}

}  // namespace cpsband
