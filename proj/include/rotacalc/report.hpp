#pragma once

// CSV payloads with a provenance header, written atomically.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rotacalc {

inline constexpr const char* kToolVersion = "rotacalc 0.1.0";

struct Provenance {
  std::string tool = kToolVersion;
  std::string config_hash;  // 16 hex digits, FNV-1a of the canonical config
  std::string generated;    // UTC, ISO 8601
};

class CsvTable {
 public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  const std::string& schema() const { return schema_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  CsvTable& add(std::vector<std::string> row);
  // Header row and data rows, no provenance.
  std::string body() const;

 private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct ReportBundle {
  std::vector<CsvTable> tables;
  std::string summary;  // human-readable lines, then an optional [summary] block
};

// 17 significant digits, locale independent.
std::string csv_number(double x);

std::string config_hash(std::string_view canonical);
std::string utc_timestamp();
Provenance make_provenance(std::string_view canonical_config);

// "# tool: ...", "# config-hash: ...", "# generated: ...", "# schema: ...",
// then the body.
std::string render_csv(const CsvTable& table, const Provenance& provenance);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// key = value lines under a [summary] header, keys in insertion order.
class SummaryBlock {
 public:
  SummaryBlock& set(std::string key, std::string value);
  SummaryBlock& set(std::string key, double value);
  std::string render(std::string_view title = "summary") const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace rotacalc
