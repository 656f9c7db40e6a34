#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cpsband::cli {

/// Header-indexed CSV table. The header row is mandatory; fields are plain
/// comma-separated values without quoting.
class CsvTable {
 public:
  static CsvTable parse(const std::string& text, const std::string& source);
  static CsvTable read(const std::filesystem::path& path);

  bool has_column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
  std::vector<long long> integer_column(const std::string& name) const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::size_t column_index(const std::string& name) const;

  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes text to a temporary sibling file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace cpsband::cli
