#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <optional>
#include <string>

#include "ocpr/app/config.hpp"
#include "ocpr/app/presets.hpp"
#include "ocpr/app/runner.hpp"
#include "ocpr/app/svg.hpp"

namespace {

enum Exit { kOk = 0, kIo = 1, kConfig = 2, kNumerical = 3 };

ocpr::app::ScenarioConfig load(const std::string& what) {
  if (std::filesystem::is_regular_file(what)) return ocpr::app::load_config(what);
  if (const auto* p = ocpr::app::find_preset(what)) return ocpr::app::parse_config(p->yaml, "preset:" + p->name);
  throw ocpr::app::IoError("'" + what + "' is neither a readable config file nor a preset name");
}

template <typename F>
int guarded(F&& f) {
  try {
    f();
    return kOk;
  } catch (const ocpr::app::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const ocpr::app::NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return kNumerical;
  } catch (const ocpr::app::IoError& e) {
    fmt::print(stderr, "i/o error: {}\n", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ocpr: offset-QAM carrier phase recovery simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario config or bundled preset");
  std::string target;
  std::string out;
  run->add_option("config", target, "YAML config path or preset name")->required();
  run->add_option("-o,--out", out, "Output directory (overrides $OCPR_OUTPUT_DIR and run.output_dir)");

  auto* list = app.add_subcommand("presets", "List bundled presets");

  auto* plot = app.add_subcommand("plot", "Render a CSV report as SVG");
  std::string csv_path;
  std::string kind;
  std::string svg_path;
  plot->add_option("csv", csv_path, "CSV produced by 'run'")->required();
  plot->add_option("kind", kind, "ber | bode | psd | lock | trace")->required();
  plot->add_option("-o,--output", svg_path, "SVG path (default: CSV path with .svg)");

  auto* version = app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*version) {
    fmt::print("ocpr {}\n", ocpr::app::tool_version());
    return kOk;
  }
  if (*list) {
    for (const auto& p : ocpr::app::presets()) fmt::print("{:<22} {}\n", p.name, p.description);
    return kOk;
  }
  if (*plot) {
    return guarded([&] {
      const auto k = ocpr::app::parse_plot_kind(kind);
      std::filesystem::path dst = svg_path.empty() ? std::filesystem::path(csv_path).replace_extension(".svg")
                                                   : std::filesystem::path(svg_path);
      ocpr::app::plot_file(csv_path, k, dst);
      fmt::print("wrote {}\n", dst.string());
    });
  }
  return guarded([&] {
    const auto cfg = load(target);
    const auto dir = ocpr::app::resolve_output_dir(cfg, out.empty() ? std::nullopt : std::optional<std::string>(out));
    const auto res = ocpr::app::run_scenario(cfg, dir);
    for (const auto& m : res.messages) fmt::print("{}\n", m);
    fmt::print("wrote {} files to {}\n", res.files.size(), res.output_dir.string());
  });
}
