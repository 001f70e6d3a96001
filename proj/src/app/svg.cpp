#include "ocpr/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <optional>
#include <stdexcept>

#include "ocpr/app/config.hpp"
#include "ocpr/ber.hpp"

namespace ocpr::app {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 300.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

struct Panel {
  std::string y_label;
  std::vector<std::string> series;
  bool log_y = false;
  std::optional<double> hline;
};

struct Spec {
  std::string title;
  std::string x;
  std::string x_label;
  bool log_x = false;
  std::vector<Panel> panels;
};

Spec spec_for(PlotKind kind) {
  switch (kind) {
    case PlotKind::Ber:
      return {"BER vs Es/N0", "snr_db", "Es/N0 (dB)", false, {{"BER", {"ber"}, true, kKp4BerThreshold}}};
    case PlotKind::Bode:
      return {"Open-loop response", "f_hz", "frequency (Hz)", true,
              {{"magnitude (dB)", {"mag_db"}, false, 0.0}, {"phase (deg)", {"phase_deg"}, false, -180.0}}};
    case PlotKind::Psd:
      return {"Phase-noise PSD", "f_hz", "frequency (Hz)", true,
              {{"PSD (rad^2/Hz)", {"psd_rad2_per_hz", "psd_open_rad2_per_hz"}, true, std::nullopt}}};
    case PlotKind::Lock:
      return {"Lock transient", "time_s", "time (s)", false,
              {{"phase (rad)", {"delta_phi_rad", "psi_rad"}, false, std::nullopt},
               {"detector output (V)", {"error_v"}, false, std::nullopt}}};
    case PlotKind::Trace:
      return {"Received I/Q", "time_s", "time (s)", false, {{"amplitude", {"i", "q"}, false, std::nullopt}}};
  }
  throw std::logic_error("unknown plot kind");
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double p0 = 0.0;  // pixel at lo
  double p1 = 1.0;  // pixel at hi

  double value(double v) const { return log ? std::log10(v) : v; }
  double pixel(double v) const { return p0 + (value(v) - lo) / (hi - lo) * (p1 - p0); }
  bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis make_axis(double vmin, double vmax, bool log, double p0, double p1) {
  Axis a;
  a.log = log;
  a.p0 = p0;
  a.p1 = p1;
  double lo = log ? std::log10(vmin) : vmin;
  double hi = log ? std::log10(vmax) : vmax;
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (hi <= lo) hi = lo + 1.0;
  } else if (hi <= lo) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

// Tick positions in axis units (log10 for log axes).
std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const int n = static_cast<int>(std::lround(a.hi - a.lo));
    const int stride = std::max(1, (n + 9) / 10);
    for (int k = 0; k <= n; k += stride) out.push_back(a.lo + k);
    return out;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

std::string tick_label(const Axis& a, double t) {
  if (a.log) return fmt::format("1e{}", static_cast<int>(std::lround(t)));
  return fmt::format("{:.4g}", t);
}

std::string esc(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "ber") return PlotKind::Ber;
  if (name == "bode") return PlotKind::Bode;
  if (name == "psd") return PlotKind::Psd;
  if (name == "lock") return PlotKind::Lock;
  if (name == "trace") return PlotKind::Trace;
  throw ConfigError("unknown plot kind '" + name + "' (ber|bode|psd|lock|trace)", 0);
}

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::Ber: return "ber";
    case PlotKind::Bode: return "bode";
    case PlotKind::Psd: return "psd";
    case PlotKind::Lock: return "lock";
    case PlotKind::Trace: return "trace";
  }
  return "?";
}

std::string emit_svg(const CsvTable& table, PlotKind kind) {
  const Spec spec = spec_for(kind);
  if (table.rows.empty()) throw ConfigError("csv has no data rows", 0);
  std::vector<double> xs;
  try {
    xs = table.values(spec.x);
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string(e.what()) + " (needed for a " + to_string(kind) + " plot)", 0);
  }

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  Axis probe;
  probe.log = spec.log_x;
  for (double x : xs) {
    if (!probe.accepts(x)) continue;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  if (!(xmin <= xmax)) throw ConfigError("no plottable x values in column " + spec.x, 0);

  const double height = kTop + spec.panels.size() * kPanelHeight + kBottom;
  fmt::memory_buffer b;
  auto out = std::back_inserter(b);
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
                 "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                 kWidth, height, kWidth, height);
  fmt::format_to(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::format_to(out, "<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                 kWidth / 2.0, esc(spec.title));

  const Axis xa = make_axis(xmin, xmax, spec.log_x, kLeft, kWidth - kRight);
  for (std::size_t p = 0; p < spec.panels.size(); ++p) {
    const Panel& panel = spec.panels[p];
    const double top = kTop + p * kPanelHeight;
    const double bottom = top + kPanelHeight - 40.0;

    std::vector<std::pair<std::size_t, std::string>> cols;
    for (const auto& name : panel.series) {
      auto it = std::find(table.columns.begin(), table.columns.end(), name);
      if (it != table.columns.end()) cols.emplace_back(static_cast<std::size_t>(it - table.columns.begin()), name);
    }
    if (cols.empty()) throw ConfigError("csv has none of the columns needed for " + panel.y_label, 0);

    Axis yprobe;
    yprobe.log = panel.log_y;
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (const auto& [k, name] : cols) {
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double y = table.rows[r][k];
        if (!yprobe.accepts(y) || !probe.accepts(xs[r])) continue;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    if (panel.hline && yprobe.accepts(*panel.hline) && kind == PlotKind::Ber) {
      ymin = std::min(ymin, *panel.hline);
      ymax = std::max(ymax, *panel.hline);
    }
    if (!(ymin <= ymax)) throw ConfigError("no plottable values for " + panel.y_label, 0);
    const Axis ya = make_axis(ymin, ymax, panel.log_y, bottom, top);

    fmt::format_to(out, "<g class=\"panel\">\n");
    fmt::format_to(out, "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                   kLeft, top, kWidth - kRight - kLeft, bottom - top);
    for (double t : ticks(xa)) {
      const double px = xa.p0 + (t - xa.lo) / (xa.hi - xa.lo) * (xa.p1 - xa.p0);
      fmt::format_to(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#dddddd\"/>\n", px,
                     top, bottom);
      fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", px, bottom + 16.0,
                     tick_label(xa, t));
    }
    for (double t : ticks(ya)) {
      const double py = ya.p0 + (t - ya.lo) / (ya.hi - ya.lo) * (ya.p1 - ya.p0);
      fmt::format_to(out, "<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#dddddd\"/>\n", py,
                     kLeft, kWidth - kRight);
      fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6.0, py + 4.0,
                     tick_label(ya, t));
    }
    fmt::format_to(out,
                   "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
                   (top + bottom) / 2.0, esc(panel.y_label));

    if (panel.hline && yprobe.accepts(*panel.hline)) {
      const double hv = *panel.hline;
      if (ya.value(hv) >= ya.lo && ya.value(hv) <= ya.hi) {
        fmt::format_to(out,
                       "<line class=\"threshold\" x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" "
                       "stroke=\"black\" stroke-dasharray=\"6 4\"/>\n",
                       ya.pixel(hv), kLeft, kWidth - kRight);
      }
    }

    for (std::size_t s = 0; s < cols.size(); ++s) {
      const auto k = cols[s].first;
      std::string d;
      bool pen = false;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double x = xs[r];
        const double y = table.rows[r][k];
        if (!probe.accepts(x) || !yprobe.accepts(y)) {
          pen = false;
          continue;
        }
        d += fmt::format("{}{:.2f},{:.2f}", pen ? " L" : (d.empty() ? "M" : " M"), xa.pixel(x), ya.pixel(y));
        pen = true;
      }
      if (d.empty()) continue;
      fmt::format_to(out, "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", d, kColors[s % 4]);
      fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" fill=\"{}\">{}</text>\n",
                     kWidth - kRight - 6.0, top + 16.0 + 14.0 * s, kColors[s % 4], esc(cols[s].second));
    }
    fmt::format_to(out, "</g>\n");
  }
  fmt::format_to(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kWidth / 2.0,
                 height - 12.0, esc(spec.x_label));
  fmt::format_to(out, "</svg>\n");
  return fmt::to_string(b);
}

void plot_file(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& svg_path) {
  const std::string svg = emit_svg(read_csv(csv_path), kind);
  write_text_file(svg_path, svg);
}

}  // namespace ocpr::app
