#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ocpr::app {

// Numeric table with a header row. Values are written with 10 significant digits.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws std::out_of_range
  std::vector<double> values(const std::string& name) const;
};

std::string format_csv(const CsvTable& table);
// Throws ConfigError on malformed text (no header, ragged rows, non-numeric cells, no data rows).
CsvTable parse_csv(const std::string& text, const std::string& source = "<csv>");

void write_text_file(const std::filesystem::path& path, const std::string& text);  // IoError on failure
std::string read_text_file(const std::filesystem::path& path);                      // IoError on failure
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ocpr::app
