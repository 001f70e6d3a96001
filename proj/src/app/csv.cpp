#include "ocpr/app/csv.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ocpr/app/config.hpp"

namespace ocpr::app {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name) return k;
  }
  throw std::out_of_range("csv has no column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const auto k = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

std::string format_csv(const CsvTable& table) {
  fmt::memory_buffer buf;
  for (std::size_t k = 0; k < table.columns.size(); ++k) {
    fmt::format_to(std::back_inserter(buf), "{}{}", k ? "," : "", table.columns[k]);
  }
  buf.push_back('\n');
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      fmt::format_to(std::back_inserter(buf), "{}{:.10g}", k ? "," : "", row[k]);
    }
    buf.push_back('\n');
  }
  return fmt::to_string(buf);
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line);
    if (!header) {
      for (auto& c : cells) {
        c = trim(c);
        if (c.empty()) throw ConfigError(fmt::format("{}:{}: empty column name", source, lineno), lineno);
      }
      t.columns = std::move(cells);
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} cells, got {}", source, lineno, t.columns.size(), cells.size()),
                        lineno);
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto& c : cells) {
      c = trim(c);
      double v = 0.0;
      const auto* end = c.data() + c.size();
      const auto [ptr, ec] = std::from_chars(c.data(), end, v);
      if (c.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}:{}: not a number: '{}'", source, lineno, c), lineno);
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw ConfigError(source + ": empty csv", 0);
  if (t.rows.empty()) throw ConfigError(source + ": csv has no data rows", 0);
  return t;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text_file(path, format_csv(table)); }

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path), path.string()); }

}  // namespace ocpr::app
