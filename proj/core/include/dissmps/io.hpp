#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dissmps {

std::string version_string();

// 17 significant digits, scientific notation.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

struct Provenance {
  std::string command;
  std::string config_hash;  // FNV-1a of the canonical config JSON
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> header_lines() const;
};

// Canonical form: keys sorted, no whitespace.
std::string canonical_json(const std::string& json_text);
Provenance make_provenance(const std::string& command, const std::string& canonical_config, std::uint64_t seed);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::string to_string(const Provenance* prov = nullptr) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv {
  std::vector<std::string> comments;  // lines starting with '#', without the marker
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_csv(const std::string& text);
// Re-serializes a parsed file; numeric cells are re-formatted through format_double.
std::string serialize_csv(const ParsedCsv& csv);

// Writes through a temporary file and renames, so failed runs leave no partial output.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace dissmps
