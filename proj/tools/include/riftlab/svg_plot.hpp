#pragma once

#include <string>
#include <vector>

namespace rift::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;  // empty: assigned from a default palette
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // plot log10(|y|) with a floor at 1e-12
    int width = 860;
    int height = 420;
};

/// Static SVG line chart; no scripting, no external references.
std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& options);

}  // namespace rift::cli
