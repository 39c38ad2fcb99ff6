#include "eventreg/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eventreg::plot {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 400;
constexpr double kLeft = 70, kRight = 760, kTop = 20, kBottom = 360;
constexpr std::size_t kBuckets = 1000;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Indices to draw: all points when short, otherwise per-bucket min and max
// in time order.
std::vector<std::size_t> decimate(const std::vector<double>& v) {
  std::vector<std::size_t> idx;
  const std::size_t n = v.size();
  if (n <= 2 * kBuckets) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  for (std::size_t b = 0; b < kBuckets; ++b) {
    const std::size_t lo = b * n / kBuckets, hi = (b + 1) * n / kBuckets;
    std::size_t imin = lo, imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (v[i] < v[imin]) imin = i;
      if (v[i] > v[imax]) imax = i;
    }
    idx.push_back(std::min(imin, imax));
    if (imin != imax) idx.push_back(std::max(imin, imax));
  }
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

std::string render_svg(const std::vector<double>& times,
                       const std::vector<Series>& series) {
  if (times.empty()) throw PlotError("render_svg: no samples");
  for (const auto& s : series) {
    if (s.values.size() != times.size()) {
      throw PlotError("render_svg: series '" + s.label + "' has wrong length");
    }
  }

  double t_lo = times.front(), t_hi = times.back();
  if (t_hi <= t_lo) t_hi = t_lo + 1.0;
  double y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      y_lo = first ? v : std::min(y_lo, v);
      y_hi = first ? v : std::max(y_hi, v);
      first = false;
    }
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double t) { return kLeft + (t - t_lo) / (t_hi - t_lo) * (kRight - kLeft); };
  auto py = [&](double y) { return kBottom - (y - y_lo) / (y_hi - y_lo) * (kBottom - kTop); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<g stroke=\"#000\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kBottom)
      << "\" x2=\"" << fixed(kRight) << "\" y2=\"" << fixed(kBottom) << "\"/>\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop)
      << "\" x2=\"" << fixed(kLeft) << "\" y2=\"" << fixed(kBottom) << "\"/>\n";
  svg << "</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#000\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / kTicks;
    const double y = y_lo + (y_hi - y_lo) * i / kTicks;
    svg << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(kBottom + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    svg << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(y) + 4)
        << "\" text-anchor=\"end\">" << tick_label(y) << "</text>\n";
  }
  svg << "<text x=\"" << fixed((kLeft + kRight) / 2) << "\" y=\""
      << fixed(kBottom + 34) << "\" text-anchor=\"middle\">t</text>\n";
  svg << "</g>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.2\" points=\"";
    bool sep = false;
    for (std::size_t i : decimate(s.values)) {
      if (!std::isfinite(s.values[i])) continue;
      if (sep) svg << ' ';
      svg << fixed(px(times[i])) << ',' << fixed(py(s.values[i]));
      sep = true;
    }
    svg << "\"/>\n";
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(k);
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<line x1=\"" << fixed(kRight + 15) << "\" y1=\"" << fixed(y)
        << "\" x2=\"" << fixed(kRight + 40) << "\" y2=\"" << fixed(y)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(kRight + 46) << "\" y=\"" << fixed(y + 4)
        << "\">" << escape(series[k].label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw PlotError("no column named '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlotError("cannot open " + path);

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw PlotError(path + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  table.columns.resize(table.header.size());

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw PlotError(path + ": bad number on line " + std::to_string(row));
      }
      table.columns[j].push_back(v);
      p = res.ptr;
      if (j + 1 < table.header.size()) {
        if (p == end || *p != ',') {
          throw PlotError(path + ": short row on line " + std::to_string(row));
        }
        ++p;
      }
    }
  }
  return table;
}

void emit_plot(const std::string& csv_path,
               const std::vector<std::string>& columns,
               const std::string& out_path) {
  if (columns.empty()) throw PlotError("emit_plot: no columns requested");
  const CsvTable table = read_csv(csv_path);
  const bool has_t =
      std::find(table.header.begin(), table.header.end(), "t") !=
      table.header.end();
  const auto& times = has_t ? table.column("t") : table.columns.front();

  std::vector<Series> series;
  for (const auto& c : columns) series.push_back({c, table.column(c)});
  const std::string svg = render_svg(times, series);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw PlotError("cannot write " + out_path);
  out << svg;
}

}  // namespace eventreg::plot
