#pragma once

#include <filesystem>
#include <string>

#include "ocpr/app/csv.hpp"

namespace ocpr::app {

enum class PlotKind { Ber, Bode, Psd, Lock, Trace };

PlotKind parse_plot_kind(const std::string& name);  // throws ConfigError
std::string to_string(PlotKind kind);

// Standalone SVG document. Output depends only on the table contents.
// Ber plots use a log y axis and carry one horizontal line at the KP4 threshold.
std::string emit_svg(const CsvTable& table, PlotKind kind);

// Reads csv_path, renders and writes svg_path. Nothing is written if reading or rendering fails.
void plot_file(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& svg_path);

}  // namespace ocpr::app
