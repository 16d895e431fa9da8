#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace gmtbench::svg {

// Deterministic, renderer-free SVG 1.1 output with a fixed viewBox. Axis
// ticks carry CSS classes so structural tests can count them.

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

struct Line {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

/// Observed-vs-predicted style line chart: one polyline per series, x ticks
/// at integer years, y ticks spread over the value range.
inline std::string line_chart(const std::string& title, const std::vector<Line>& lines,
                              const std::string& y_label) {
    const double width = 800, height = 500;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& l : lines)
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            xmin = std::min(xmin, l.x[i]);
            xmax = std::max(xmax, l.x[i]);
            ymin = std::min(ymin, l.y[i]);
            ymax = std::max(ymax, l.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    const auto sy = [&](double v) {
        return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 800 500\">\n";
    out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
           "</text>\n";

    // axes
    out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(height - mb) + "\" x2=\"" +
           detail::num(width - mr) + "\" y2=\"" + detail::num(height - mb) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(mt) + "\" x2=\"" +
           detail::num(ml) + "\" y2=\"" + detail::num(height - mb) + "\" stroke=\"black\"/>\n";

    // x ticks: one per integer year
    for (int year = static_cast<int>(std::ceil(xmin)); year <= static_cast<int>(xmax); ++year) {
        const double px = sx(year);
        out += "<line class=\"xtick\" x1=\"" + detail::num(px) + "\" y1=\"" +
               detail::num(height - mb) + "\" x2=\"" + detail::num(px) + "\" y2=\"" +
               detail::num(height - mb + 6) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::num(px) + "\" y=\"" + detail::num(height - mb + 22) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(year) + "</text>\n";
    }
    // y ticks
    const int yticks = 6;
    for (int i = 0; i <= yticks; ++i) {
        const double v = ymin + (ymax - ymin) * i / yticks;
        const double py = sy(v);
        out += "<line class=\"ytick\" x1=\"" + detail::num(ml - 6) + "\" y1=\"" + detail::num(py) +
               "\" x2=\"" + detail::num(ml) + "\" y2=\"" + detail::num(py) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::num(ml - 10) + "\" y=\"" + detail::num(py + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + detail::metric(v) + "</text>\n";
    }
    out += "<text x=\"18\" y=\"" + detail::num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 " +
           detail::num((mt + height - mb) / 2) + ")\">" + y_label + "</text>\n";

    int li = 0;
    for (const auto& l : lines) {
        std::string pts;
        for (std::size_t i = 0; i < l.x.size(); ++i) {
            if (i) pts += " ";
            pts += detail::num(sx(l.x[i])) + "," + detail::num(sy(l.y[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + l.color + "\" stroke-width=\"2\" points=\"" +
               pts + "\"/>\n";
        out += "<text x=\"" + detail::num(width - mr - 8) + "\" y=\"" +
               detail::num(mt + 16 + 16 * li) + "\" text-anchor=\"end\" font-size=\"12\" fill=\"" +
               l.color + "\">" + l.label + "</text>\n";
        ++li;
    }
    out += "</svg>\n";
    return out;
}

struct Bar {
    std::string label;
    double value = 0.0;
};

inline std::string bar_chart(const std::string& title, const std::vector<Bar>& bars,
                             const std::string& y_label) {
    const double width = 800, height = 500;
    const double ml = 70, mr = 20, mt = 40, mb = 140;
    double vmax = 0.0;
    for (const auto& b : bars) vmax = std::max(vmax, b.value);
    if (vmax <= 0.0) vmax = 1.0;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 800 500\">\n";
    out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
           "</text>\n";
    out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(height - mb) + "\" x2=\"" +
           detail::num(width - mr) + "\" y2=\"" + detail::num(height - mb) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(mt) + "\" x2=\"" +
           detail::num(ml) + "\" y2=\"" + detail::num(height - mb) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"18\" y=\"" + detail::num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 " +
           detail::num((mt + height - mb) / 2) + ")\">" + y_label + "</text>\n";

    const double span = width - ml - mr;
    const double bw = span / std::max<std::size_t>(1, bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = bars[i].value / vmax * (height - mt - mb);
        const double x0 = ml + bw * static_cast<double>(i) + 0.15 * bw;
        out += "<rect class=\"bar\" x=\"" + detail::num(x0) + "\" y=\"" +
               detail::num(height - mb - h) + "\" width=\"" + detail::num(0.7 * bw) +
               "\" height=\"" + detail::num(h) + "\" fill=\"steelblue\"/>\n";
        const double lx = x0 + 0.35 * bw;
        const double ly = height - mb + 10;
        out += "<text x=\"" + detail::num(lx) + "\" y=\"" + detail::num(ly) +
               "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-60 " +
               detail::num(lx) + " " + detail::num(ly) + ")\">" + bars[i].label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace gmtbench::svg
