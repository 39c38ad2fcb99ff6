#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eventreg::plot {

class PlotError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Series {
  std::string label;
  std::vector<double> values;
};

/// Deterministic 900x400 SVG line plot, time on the abscissa, one polyline
/// per series plus a legend. Long series are min/max decimated.
std::string render_svg(const std::vector<double>& times,
                       const std::vector<Series>& series);

/// Header row plus numeric rows, as written by write_csv.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Reads `csv_path`, plots `columns` against its `t` column (or its first
/// column) and writes the SVG to `out_path`. Throws PlotError on a missing
/// column.
void emit_plot(const std::string& csv_path,
               const std::vector<std::string>& columns,
               const std::string& out_path);

}  // namespace eventreg::plot
