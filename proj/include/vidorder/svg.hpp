#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace vidorder {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

/// Minimal self-contained SVG line chart: axes, ticks, grid, legend, one
/// polyline per series. Good enough to eyeball sweep results.
inline void write_line_chart(std::ostream& os, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<ChartSeries>& series) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 160, mt = 50, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmin <= xmax)) {  // no points at all
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) {
        xmax += 1;
        xmin -= 1;
    }
    if (ymax == ymin) {
        ymax += (ymax == 0 ? 1 : std::abs(ymax) * 0.1);
        ymin -= (ymin == 0 ? 1 : std::abs(ymin) * 0.1);
    }
    ymin = std::min(ymin, 0.0);  // delays: anchor at zero
    const double ypad = 0.05 * (ymax - ymin);
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    char buf[512];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"28\" font-family=\"sans-serif\" font-size=\"17\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  ml + static_cast<int>(pw / 2), title.c_str());
    os << buf;

    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double xv = xmin + (xmax - xmin) * i / nticks;
        const double yv = ymin + (ymax - ymin) * i / nticks;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" stroke=\"#ddd\"/>\n",
                      px(xv), mt, px(xv), mt + static_cast<int>(ph));
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#ddd\"/>\n", ml,
                      py(yv), ml + static_cast<int>(pw), py(yv));
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.4g</text>\n",
                      px(xv), mt + static_cast<int>(ph) + 16, xv);
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.4g</text>\n",
                      ml - 6, py(yv) + 4, yv);
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#333\"/>\n",
                  ml, mt, static_cast<int>(pw), static_cast<int>(ph));
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  ml + static_cast<int>(pw / 2), height - 14, x_label.c_str());
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"18\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
                  "text-anchor=\"middle\" transform=\"rotate(-90 18 %d)\">%s</text>\n",
                  mt + static_cast<int>(ph / 2), mt + static_cast<int>(ph / 2), y_label.c_str());
    os << buf;

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % (sizeof palette / sizeof palette[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : series[s].points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
            os << buf;
        }
        os << "\"/>\n";
        for (const auto& [x, y] : series[s].points) {
            std::snprintf(buf, sizeof buf,
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(y),
                          color);
            os << buf;
        }
        const int ly = mt + 10 + static_cast<int>(s) * 20;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"%s\" "
                      "stroke-width=\"2\"/>\n",
                      width - mr + 12, ly, width - mr + 38, ly, color);
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                      "font-size=\"12\">%s</text>\n",
                      width - mr + 44, ly + 4, series[s].name.c_str());
        os << buf;
    }
    os << "</svg>\n";
}

}  // namespace vidorder
