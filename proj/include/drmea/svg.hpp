#pragma once

#include <optional>
#include <string>
#include <vector>

namespace drmea {

struct SvgSeries {
    std::string label;
    std::vector<double> y;  // aligned with the shared x vector; NaN points are skipped
};

// Deterministic standalone SVG line chart (no plotting dependency). Axis
// extremes are printed as tick labels with %.6g so they can be parsed back.
// vline_x, when set, draws a dashed vertical marker at that x position.
std::string svg_line_chart(const std::string& title, const std::vector<double>& x,
                           const std::vector<SvgSeries>& series,
                           std::optional<double> vline_x = std::nullopt);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace drmea
