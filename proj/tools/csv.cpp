#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cpsband/error.hpp"

namespace cpsband::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string{}
                                             : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable CsvTable::parse(const std::string& text, const std::string& source) {
  CsvTable table;
  table.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line);
    if (table.header_.empty()) {
      table.header_ = std::move(fields);
      continue;
    }
    if (fields.size() != table.header_.size()) {
      throw InvalidArgument(source + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header_.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    table.rows_.push_back(std::move(fields));
  }
  if (table.header_.empty()) throw InvalidArgument(source + ": missing header row");
  return table;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw InvalidArgument(source_ + ": missing column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::string& f = rows_[r][c];
    try {
      std::size_t used = 0;
      const double v = std::stod(f, &used);
      if (used != f.size()) throw std::invalid_argument(f);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw InvalidArgument(source_ + ": row " + std::to_string(r + 1) + ": '" + f +
                            "' in column '" + name + "' is not a number");
    }
  }
  return out;
}

std::vector<long long> CsvTable::integer_column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<long long> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::string& f = rows_[r][c];
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      throw InvalidArgument(source_ + ": row " + std::to_string(r + 1) + ": '" + f +
                            "' in column '" + name + "' is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InvalidArgument("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace cpsband::cli
