#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "epirbn/analysis.hpp"
#include "epirbn/experiment.hpp"

// Self-contained SVG renderings of a summary CSV: one chart per metric,
// mean per parameter point with min/max whiskers, connectivity B on the x
// axis and one series per (scenario, K, C). Output is deterministic: all
// coordinates are fixed two-decimal strings.

namespace epirbn {

struct SummaryRow {
  std::string scenario;
  ParamPoint point;
  SummaryStats stats;
};

inline std::vector<SummaryRow> load_summary_csv(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(file, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryCsvHeader)
    throw std::invalid_argument(path + ": not a summary CSV (unexpected header)");
  std::vector<SummaryRow> rows;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 14) throw std::invalid_argument(path + ": wrong column count");
    SummaryRow row;
    row.scenario = fields[0];
    row.point = {detail::parse_int_field(fields[1], path), detail::parse_int_field(fields[2], path),
                 detail::parse_int_field(fields[3], path)};
    row.stats.runs = detail::parse_int_field(fields[4], path);
    row.stats.fit_mean = detail::parse_double_field(fields[5], path);
    row.stats.fit_min = detail::parse_double_field(fields[6], path);
    row.stats.fit_max = detail::parse_double_field(fields[7], path);
    row.stats.epi_mean = detail::parse_double_field(fields[8], path);
    row.stats.epi_min = detail::parse_int_field(fields[9], path);
    row.stats.epi_max = detail::parse_int_field(fields[10], path);
    row.stats.d_mean = detail::parse_double_field(fields[11], path);
    row.stats.d_min = detail::parse_int_field(fields[12], path);
    row.stats.d_max = detail::parse_int_field(fields[13], path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
  return rows;
}

enum class PlotMetric { fitness, epi_nodes, dev_steps };

inline const char* plot_metric_name(PlotMetric metric) {
  switch (metric) {
    case PlotMetric::fitness: return "fitness";
    case PlotMetric::epi_nodes: return "epi_nodes";
    case PlotMetric::dev_steps: return "dev_steps";
  }
  return "unknown";
}

inline double metric_mean(const SummaryStats& s, PlotMetric metric) {
  switch (metric) {
    case PlotMetric::fitness: return s.fit_mean;
    case PlotMetric::epi_nodes: return s.epi_mean;
    case PlotMetric::dev_steps: return s.d_mean;
  }
  return 0.0;
}

inline double metric_min(const SummaryStats& s, PlotMetric metric) {
  switch (metric) {
    case PlotMetric::fitness: return s.fit_min;
    case PlotMetric::epi_nodes: return s.epi_min;
    case PlotMetric::dev_steps: return s.d_min;
  }
  return 0.0;
}

inline double metric_max(const SummaryStats& s, PlotMetric metric) {
  switch (metric) {
    case PlotMetric::fitness: return s.fit_max;
    case PlotMetric::epi_nodes: return s.epi_max;
    case PlotMetric::dev_steps: return s.d_max;
  }
  return 0.0;
}

// Chart geometry, exposed so tests can recompute expected coordinates.
inline constexpr int kPlotWidth = 680;
inline constexpr int kPlotHeight = 420;
inline constexpr int kPlotMarginLeft = 64;
inline constexpr int kPlotMarginRight = 170;
inline constexpr int kPlotMarginTop = 40;
inline constexpr int kPlotMarginBottom = 52;
inline constexpr int kWhiskerCapHalf = 4;

// Value range shown on the y axis: the data's min/max span padded by 5%,
// widened around a degenerate flat span.
inline std::pair<double, double> plot_value_range(const std::vector<SummaryRow>& rows,
                                                  PlotMetric metric) {
  if (rows.empty()) throw std::invalid_argument("plot: no summary rows");
  double lo = metric_min(rows.front().stats, metric);
  double hi = metric_max(rows.front().stats, metric);
  for (const SummaryRow& row : rows) {
    lo = std::min(lo, metric_min(row.stats, metric));
    hi = std::max(hi, metric_max(row.stats, metric));
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// x center of the i-th of `count` B positions.
inline double plot_x(int index, int count) {
  const double span = kPlotWidth - kPlotMarginLeft - kPlotMarginRight;
  return kPlotMarginLeft + span * (index + 0.5) / count;
}

inline double plot_y(double value, double lo, double hi) {
  const double span = kPlotHeight - kPlotMarginTop - kPlotMarginBottom;
  return kPlotMarginTop + span * (hi - value) / (hi - lo);
}

inline std::string plot_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace detail {

inline constexpr const char* kSeriesColors[] = {"#1f6fb2", "#c23b22", "#2e8b57", "#8e5ba6",
                                                "#b8860b", "#3f7f7f", "#aa3377", "#556b2f"};

inline std::string series_label(const std::string& scenario, const ParamPoint& pt,
                                bool many_scenarios) {
  std::string label = "K=" + std::to_string(pt.k);
  if (pt.c != 0) label += " C=" + std::to_string(pt.c);
  if (many_scenarios) label = scenario + " " + label;
  return label;
}

}  // namespace detail

inline std::string render_metric_svg(const std::vector<SummaryRow>& rows, PlotMetric metric) {
  if (rows.empty()) throw std::invalid_argument("plot: no summary rows");
  std::vector<int> b_values;
  for (const SummaryRow& row : rows) b_values.push_back(row.point.b);
  std::sort(b_values.begin(), b_values.end());
  b_values.erase(std::unique(b_values.begin(), b_values.end()), b_values.end());
  auto b_index = [&](int b) {
    return static_cast<int>(std::lower_bound(b_values.begin(), b_values.end(), b) -
                            b_values.begin());
  };

  std::map<std::tuple<std::string, int, int>, std::vector<const SummaryRow*>> series;
  bool many_scenarios = false;
  for (const SummaryRow& row : rows) {
    series[{row.scenario, row.point.k, row.point.c}].push_back(&row);
    if (row.scenario != rows.front().scenario) many_scenarios = true;
  }
  for (auto& [key, members] : series)
    std::sort(members.begin(), members.end(),
              [](const SummaryRow* a, const SummaryRow* b) { return a->point.b < b->point.b; });

  const auto [lo, hi] = plot_value_range(rows, metric);
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kPlotWidth) +
         "\" height=\"" + std::to_string(kPlotHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kPlotWidth) + " " + std::to_string(kPlotHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + plot_coord(kPlotMarginLeft) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         std::string(plot_metric_name(metric)) + " vs B</text>\n";

  const double axis_bottom = kPlotHeight - kPlotMarginBottom;
  const double axis_right = kPlotWidth - kPlotMarginRight;
  svg += "<line x1=\"" + plot_coord(kPlotMarginLeft) + "\" y1=\"" + plot_coord(kPlotMarginTop) +
         "\" x2=\"" + plot_coord(kPlotMarginLeft) + "\" y2=\"" + plot_coord(axis_bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + plot_coord(kPlotMarginLeft) + "\" y1=\"" + plot_coord(axis_bottom) +
         "\" x2=\"" + plot_coord(axis_right) + "\" y2=\"" + plot_coord(axis_bottom) +
         "\" stroke=\"black\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double value = lo + (hi - lo) * tick / 4.0;
    const double y = plot_y(value, lo, hi);
    char label[32];
    std::snprintf(label, sizeof label, "%.3f", value);
    svg += "<line x1=\"" + plot_coord(kPlotMarginLeft - 4) + "\" y1=\"" + plot_coord(y) +
           "\" x2=\"" + plot_coord(kPlotMarginLeft) + "\" y2=\"" + plot_coord(y) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + plot_coord(kPlotMarginLeft - 8) + "\" y=\"" + plot_coord(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + label +
           "</text>\n";
  }
  for (std::size_t i = 0; i < b_values.size(); ++i) {
    const double x = plot_x(static_cast<int>(i), static_cast<int>(b_values.size()));
    svg += "<line x1=\"" + plot_coord(x) + "\" y1=\"" + plot_coord(axis_bottom) + "\" x2=\"" +
           plot_coord(x) + "\" y2=\"" + plot_coord(axis_bottom + 4) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + plot_coord(x) + "\" y=\"" + plot_coord(axis_bottom + 18) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           std::to_string(b_values[i]) + "</text>\n";
  }
  svg += "<text x=\"" + plot_coord((kPlotMarginLeft + axis_right) / 2.0) + "\" y=\"" +
         plot_coord(kPlotHeight - 14) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">B</text>\n";

  int color_idx = 0;
  double legend_y = kPlotMarginTop + 10;
  for (const auto& [key, members] : series) {
    const char* color =
        detail::kSeriesColors[color_idx % (sizeof detail::kSeriesColors / sizeof(const char*))];
    ++color_idx;
    std::string polyline = "<polyline fill=\"none\" stroke=\"";
    polyline += color;
    polyline += "\" stroke-width=\"1.5\" points=\"";
    for (const SummaryRow* row : members) {
      const double x = plot_x(b_index(row->point.b), static_cast<int>(b_values.size()));
      const double y = plot_y(metric_mean(row->stats, metric), lo, hi);
      polyline += plot_coord(x) + "," + plot_coord(y) + " ";
    }
    polyline += "\"/>\n";
    svg += polyline;
    for (const SummaryRow* row : members) {
      const double x = plot_x(b_index(row->point.b), static_cast<int>(b_values.size()));
      const double y_mean = plot_y(metric_mean(row->stats, metric), lo, hi);
      const double y_min = plot_y(metric_min(row->stats, metric), lo, hi);
      const double y_max = plot_y(metric_max(row->stats, metric), lo, hi);
      svg += "<line x1=\"" + plot_coord(x) + "\" y1=\"" + plot_coord(y_min) + "\" x2=\"" +
             plot_coord(x) + "\" y2=\"" + plot_coord(y_max) + "\" stroke=\"" + color + "\"/>\n";
      for (double y_cap : {y_min, y_max})
        svg += "<line x1=\"" + plot_coord(x - kWhiskerCapHalf) + "\" y1=\"" + plot_coord(y_cap) +
               "\" x2=\"" + plot_coord(x + kWhiskerCapHalf) + "\" y2=\"" + plot_coord(y_cap) +
               "\" stroke=\"" + color + "\"/>\n";
      svg += "<circle cx=\"" + plot_coord(x) + "\" cy=\"" + plot_coord(y_mean) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    const auto& [scenario, k, c] = key;
    svg += "<rect x=\"" + plot_coord(axis_right + 12) + "\" y=\"" + plot_coord(legend_y - 8) +
           "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + plot_coord(axis_right + 28) + "\" y=\"" + plot_coord(legend_y + 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::series_label(scenario, {0, k, c}, many_scenarios) + "</text>\n";
    legend_y += 18;
  }
  svg += "</svg>\n";
  return svg;
}

// Render one SVG per metric from a summary CSV. Returns the written paths.
inline std::vector<std::string> cmd_plot(const std::string& summary_csv,
                                         const std::string& out_dir) {
  const std::vector<SummaryRow> rows = load_summary_csv(summary_csv);
  std::error_code dir_err;
  std::filesystem::create_directories(out_dir, dir_err);
  std::vector<std::string> written;
  for (PlotMetric metric :
       {PlotMetric::fitness, PlotMetric::epi_nodes, PlotMetric::dev_steps}) {
    const std::filesystem::path path =
        std::filesystem::path(out_dir) / (std::string(plot_metric_name(metric)) + ".svg");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open \"" + path.string() + "\"");
    file << render_metric_svg(rows, metric);
    if (!file.flush()) throw std::runtime_error("failed writing \"" + path.string() + "\"");
    written.push_back(path.string());
  }
  return written;
}

}  // namespace epirbn
