#include "rotacalc/report.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "rotacalc/errors.hpp"
#include "rotacalc/real.hpp"

namespace rotacalc {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += quote(row[i]);
  }
  out += '\n';
}

}  // namespace

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

CsvTable& CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns_.size()) {
    throw std::logic_error("csv row for " + schema_ + " has " + std::to_string(row.size()) + " fields, expected " +
                           std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
  return *this;
}

std::string CsvTable::body() const {
  std::string out;
  append_row(out, columns_);
  for (const auto& r : rows_) append_row(out, r);
  return out;
}

std::string csv_number(double x) { return format_real(x, 17); }

std::string config_hash(std::string_view canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Provenance make_provenance(std::string_view canonical_config) {
  Provenance p;
  p.config_hash = config_hash(canonical_config);
  p.generated = utc_timestamp();
  return p;
}

std::string render_csv(const CsvTable& table, const Provenance& provenance) {
  std::string out;
  out += "# tool: " + provenance.tool + "\n";
  out += "# config-hash: " + provenance.config_hash + "\n";
  out += "# generated: " + provenance.generated + "\n";
  out += "# schema: " + table.schema() + "\n";
  return out + table.body();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw DomainError("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DomainError("cannot move output into place at " + path.string());
  }
}

SummaryBlock& SummaryBlock::set(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
  return *this;
}

SummaryBlock& SummaryBlock::set(std::string key, double value) { return set(std::move(key), csv_number(value)); }

std::string SummaryBlock::render(std::string_view title) const {
  std::ostringstream os;
  os << '[' << title << "]\n";
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace rotacalc
