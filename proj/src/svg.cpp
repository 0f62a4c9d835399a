#include "drmea/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drmea/errors.hpp"

namespace drmea {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 610.0, kTop = 50.0, kBottom = 370.0;

const char* kPalette[] = {"#1f6fb4", "#d1495b", "#3a9d5d", "#8557a8", "#c78a2d", "#4f4f4f"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::vector<double>& x,
                           const std::vector<SvgSeries>& series, std::optional<double> vline_x) {
    if (x.empty()) throw UsageError("svg chart: empty x vector");
    for (const SvgSeries& s : series)
        if (s.y.size() != x.size()) throw UsageError("svg chart: series length mismatch");

    double x_min = x.front(), x_max = x.front();
    for (double v : x) {
        x_min = std::min(x_min, v);
        x_max = std::max(x_max, v);
    }
    bool any = false;
    double y_min = 0.0, y_max = 0.0;
    for (const SvgSeries& s : series)
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (!any) {
                y_min = y_max = v;
                any = true;
            } else {
                y_min = std::min(y_min, v);
                y_max = std::max(y_max, v);
            }
        }
    if (!any) throw UsageError("svg chart: no finite data points");
    const double x_span = (x_max > x_min) ? (x_max - x_min) : 1.0;
    const double y_span = (y_max > y_min) ? (y_max - y_min) : 1.0;

    auto px = [&](double v) { return kLeft + (v - x_min) / x_span * (kRight - kLeft); };
    auto py = [&](double v) { return kBottom - (v - y_min) / y_span * (kBottom - kTop); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << (kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // Axes with extreme tick labels.
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"" << (kBottom + 20)
        << "\" text-anchor=\"middle\" font-size=\"12\" class=\"x-min\">" << fmt(x_min)
        << "</text>\n";
    out << "<text x=\"" << kRight << "\" y=\"" << (kBottom + 20)
        << "\" text-anchor=\"middle\" font-size=\"12\" class=\"x-max\">" << fmt(x_max)
        << "</text>\n";
    out << "<text x=\"" << (kLeft - 8) << "\" y=\"" << (kBottom + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" class=\"y-min\">" << fmt(y_min) << "</text>\n";
    out << "<text x=\"" << (kLeft - 8) << "\" y=\"" << (kTop + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" class=\"y-max\">" << fmt(y_max) << "</text>\n";

    if (vline_x && std::isfinite(*vline_x)) {
        const double vx = px(*vline_x);
        out << "<line x1=\"" << fmt_coord(vx) << "\" y1=\"" << kTop << "\" x2=\"" << fmt_coord(vx)
            << "\" y2=\"" << kBottom
            << "\" stroke=\"#1f6fb4\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::ostringstream pts;
        bool open = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(series[s].y[i])) continue;
            if (open) pts << ' ';
            pts << fmt_coord(px(x[i])) << ',' << fmt_coord(py(series[s].y[i]));
            open = true;
        }
        if (!open) continue;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        out << "<text x=\"" << (kRight - 120) << "\" y=\"" << (kTop + 16 + 16 * s)
            << "\" font-size=\"12\" fill=\"" << color << "\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace drmea
