#include "riftlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rift/errors.hpp"

namespace rift::cli {

namespace {

const char* kPalette[] = {"#3366cc", "#dc3912", "#109618", "#ff9900", "#990099", "#0099c6"};

struct Bounds {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void update(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            double margin = 0.05 * (hi - lo);
            lo -= margin;
            hi += margin;
        }
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& options) {
    if (series.empty()) {
        throw InputError("render_line_plot requires at least one series");
    }
    const double ml = 70, mr = 20, mt = 36, mb = 46;
    const double pw = options.width - ml - mr;
    const double ph = options.height - mt - mb;

    auto transform_y = [&](double v) {
        return options.log_y ? std::log10(std::max(std::abs(v), 1e-12)) : v;
    };

    Bounds bx, by;
    for (const Series& s : series) {
        if (s.x.size() != s.y.size()) {
            throw InputError("series x/y lengths differ");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            bx.update(s.x[i]);
            by.update(transform_y(s.y[i]));
        }
    }
    bx.pad();
    by.pad();

    auto sx = [&](double v) { return ml + (v - bx.lo) / (bx.hi - bx.lo) * pw; };
    auto sy = [&](double v) { return mt + ph - (transform_y(v) - by.lo) / (by.hi - by.lo) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
        << options.height << "\" viewBox=\"0 0 " << options.width << " " << options.height
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << options.title << "</text>\n";

    // Axes and gridlines with 5 ticks per axis.
    out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\"/>\n</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">\n";
    for (int t = 0; t <= 5; ++t) {
        double fx = bx.lo + (bx.hi - bx.lo) * t / 5.0;
        double px = sx(fx);
        out << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
            << mt + ph + 4 << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
            << fmt(fx) << "</text>\n";
        double fy = by.lo + (by.hi - by.lo) * t / 5.0;
        double py = mt + ph - ph * t / 5.0;
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
            << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 3 << "\" text-anchor=\"end\">"
            << (options.log_y ? "1e" + fmt(fy) : fmt(fy)) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << options.height - 8
        << "\" text-anchor=\"middle\" font-size=\"12\">" << options.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << options.y_label << "</text>\n";
    out << "</g>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        std::string color = s.color.empty() ? kPalette[si % 6] : s.color;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        double ly = mt + 14 + 14 * static_cast<double>(si);
        out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly - 4 << "\" x2=\""
            << ml + pw - 100 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw - 94 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace rift::cli
