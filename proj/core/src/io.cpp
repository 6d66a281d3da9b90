#include "dissmps/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dissmps/types.hpp"

#ifndef DISSMPS_VERSION
#define DISSMPS_VERSION "0.0.0"
#endif

namespace dissmps {

std::string version_string() { return DISSMPS_VERSION; }

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> Provenance::header_lines() const {
  return {"dissmps " + version + " command=" + command, "config_hash=" + config_hash,
          "seed=" + std::to_string(seed)};
}

std::string canonical_json(const std::string& json_text) {
  try {
    return nlohmann::json::parse(json_text).dump();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

Provenance make_provenance(const std::string& command, const std::string& canonical_config, std::uint64_t seed) {
  Provenance p;
  p.command = command;
  p.config_hash = hex64(fnv1a64(canonical_config));
  p.seed = seed;
  p.version = version_string();
  return p;
}

namespace {

// Cells holding separators, quotes or line breaks are quoted with doubled inner quotes.
std::string quote_cell(const std::string& c) {
  if (c.find_first_of(",\"\n\r") == std::string::npos) return c;
  std::string q = "\"";
  for (char ch : c) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw ValidationError("row width does not match the header");
  rows_.push_back(cells);
}

std::string CsvTable::to_string(const Provenance* prov) const {
  std::ostringstream os;
  if (prov)
    for (const auto& l : prov->header_lines()) os << "# " << l << '\n';
  for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << quote_cell(columns_[i]);
  os << '\n';
  for (const auto& r : rows_) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote_cell(r[i]);
    os << '\n';
  }
  return os.str();
}

namespace {

// Reads one record starting at `pos`; quoted cells may span lines.
std::vector<std::string> read_record(const std::string& text, size_t& pos) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    const char ch = text[pos++];
    if (quoted) {
      if (ch != '"') {
        cur += ch;
      } else if (pos < text.size() && text[pos] == '"') {
        cur += '"';
        ++pos;
      } else {
        quoted = false;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch == '\n') {
      break;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ValidationError("CSV has an unterminated quoted cell");
  out.push_back(std::move(cur));
  return out;
}

bool numeric(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv csv;
  size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    if (text.compare(pos, 2, "# ") == 0) {
      const size_t eol = text.find('\n', pos);
      const size_t end = eol == std::string::npos ? text.size() : eol;
      csv.comments.push_back(text.substr(pos + 2, end - pos - 2));
      pos = end + 1;
      continue;
    }
    auto cells = read_record(text, pos);
    if (!header) {
      csv.columns = std::move(cells);
      header = true;
      continue;
    }
    if (cells.size() != csv.columns.size()) throw ValidationError("CSV row width does not match the header");
    csv.rows.push_back(std::move(cells));
  }
  if (!header) throw ValidationError("CSV has no header row");
  return csv;
}

std::string serialize_csv(const ParsedCsv& csv) {
  CsvTable t(csv.columns);
  for (const auto& r : csv.rows) {
    std::vector<std::string> cells;
    for (const auto& c : r) {
      double v;
      cells.push_back(numeric(c, v) && c.find('e') != std::string::npos ? format_double(v) : c);
    }
    t.add_row(cells);
  }
  std::ostringstream os;
  for (const auto& c : csv.comments) os << "# " << c << '\n';
  os << t.to_string();
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace dissmps
