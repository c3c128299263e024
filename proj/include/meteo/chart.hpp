#pragma once

#include "meteo/chart_spec.hpp"

#include <string>

namespace meteo::chart {

// Fixed canvas and plot area, in pixels.
struct Layout {
    static constexpr int width = 800;
    static constexpr int height = 400;
    static constexpr double plot_left = 70.0;
    static constexpr double plot_right = 780.0;
    static constexpr double plot_top = 40.0;
    static constexpr double plot_bottom = 330.0;
};

struct RenderedChart {
    ChartSpec spec;
    std::string svg_text;
    int width = Layout::width;
    int height = Layout::height;

    bool operator==(const RenderedChart&) const = default;
};

// Axis bounds for a set of plotted values: [min - 5% span, max + 5% span],
// or [v - 1, v + 1] when every value is equal.
struct AxisRange {
    double min = 0.0;
    double max = 1.0;
};

AxisRange value_axis(const ChartSpec& spec, const ForecastSeries& series);

// Throws like validate_chart_spec on a spec/series mismatch.
RenderedChart render_chart(const ChartSpec& spec, const ForecastSeries& series);

// The SVG without its XML declaration, for inlining into HTML.
std::string inline_svg(const RenderedChart& chart);

} // namespace meteo::chart
