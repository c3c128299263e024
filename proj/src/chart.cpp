#include "meteo/chart.hpp"

#include "meteo/error.hpp"
#include "meteo/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <limits>

namespace meteo {

bool chartable(Parameter p) noexcept
{
    return p != Parameter::condition_code;
}

void validate_chart_spec(const ChartSpec& spec, const ForecastSeries& series)
{
    if (spec.title.empty())
        throw Error(ErrorKind::precondition, "chart spec has an empty title");
    if (spec.y_axis_label.empty())
        throw Error(ErrorKind::precondition, "chart spec has an empty y-axis label");
    if (spec.parameters.empty() || spec.parameters.size() > kMaxChartParameters)
        throw Error(ErrorKind::precondition,
                    fmt::format("chart spec needs 1..{} parameters, got {}", kMaxChartParameters, spec.parameters.size()));
    for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
        const auto p = spec.parameters[i];
        if (!chartable(p))
            throw Error(ErrorKind::unknown_parameter, fmt::format("parameter '{}' cannot be charted", parameter_name(p)));
        if (std::find(spec.parameters.begin(), spec.parameters.begin() + i, p) != spec.parameters.begin() + i)
            throw Error(ErrorKind::precondition, fmt::format("parameter '{}' listed twice", parameter_name(p)));
        for (const auto& s : series.samples())
            if (!parameter_value(s, p))
                throw Error(ErrorKind::unknown_parameter,
                            fmt::format("parameter '{}' has no value at {}", parameter_name(p), iso_utc(s.timestamp)));
    }
    for (const auto& r : spec.highlight_ranges) {
        if (r.start > r.end || r.start < series.start() || r.end > series.end())
            throw Error(ErrorKind::precondition,
                        fmt::format("highlight range {}..{} outside series {}..{}", iso_utc(r.start), iso_utc(r.end),
                                    iso_utc(series.start()), iso_utc(series.end())));
    }
}

std::vector<ChartSpec> default_chart_specs()
{
    return {
        ChartSpec{ChartKind::line, "Temperature", {Parameter::temperature}, "Temperature (°C)", {}},
        ChartSpec{ChartKind::line, "Wind speed", {Parameter::wind_speed}, "Wind speed (m/s)", {}},
        ChartSpec{ChartKind::line, "Precipitation", {Parameter::precipitation}, "Precipitation (mm/h)", {}},
    };
}

namespace chart {

namespace {

constexpr std::array<std::string_view, 3> kPalette{"#d62728", "#1f77b4", "#2ca02c"};

std::string num(double v)
{
    auto s = fmt::format("{:.2f}", v);
    if (s == "-0.00")
        s = "0.00";
    return s;
}

int tick_decimals(double step)
{
    if (step >= 5.0)
        return 0;
    if (step >= 0.1)
        return 1;
    return 2;
}

std::string tick_label(double v, int decimals)
{
    auto s = fmt::format("{:.{}f}", v, decimals);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

} // namespace

AxisRange value_axis(const ChartSpec& spec, const ForecastSeries& series)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto p : spec.parameters)
        for (const auto& s : series.samples())
            if (const auto v = parameter_value(s, p)) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
    const double span = hi - lo;
    if (span == 0.0)
        return {lo - 1.0, hi + 1.0};
    return {lo - 0.05 * span, hi + 0.05 * span};
}

RenderedChart render_chart(const ChartSpec& spec, const ForecastSeries& series)
{
    validate_chart_spec(spec, series);

    using L = Layout;
    const auto axis = value_axis(spec, series);
    const double t0 = static_cast<double>(series.start());
    const double t1 = static_cast<double>(series.end());
    const auto x_of = [&](Timestamp t) {
        if (t1 == t0)
            return L::plot_left;
        return L::plot_left + (static_cast<double>(t) - t0) / (t1 - t0) * (L::plot_right - L::plot_left);
    };
    const auto y_of = [&](double v) {
        return L::plot_top + (axis.max - v) / (axis.max - axis.min) * (L::plot_bottom - L::plot_top);
    };
    const int offset = series.location().utc_offset_seconds;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                       "font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">\n",
                       L::width, L::height);
    svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", L::width, L::height);
    svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"14\" font-weight=\"bold\">{}</text>\n", num(L::plot_left),
                       xml_escape(spec.title));

    svg += fmt::format("<g class=\"plot\" data-x-min=\"{}\" data-x-max=\"{}\" data-y-min=\"{}\" data-y-max=\"{}\" "
                       "data-plot-left=\"{}\" data-plot-right=\"{}\" data-plot-top=\"{}\" data-plot-bottom=\"{}\">\n",
                       series.start(), series.end(), fmt::format("{:.17g}", axis.min), fmt::format("{:.17g}", axis.max),
                       num(L::plot_left), num(L::plot_right), num(L::plot_top), num(L::plot_bottom));

    for (const auto& r : spec.highlight_ranges) {
        const double xa = x_of(r.start);
        const double xb = x_of(r.end);
        svg += fmt::format("<rect class=\"highlight\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#f5b041\" "
                           "fill-opacity=\"0.25\"/>\n",
                           num(xa), num(L::plot_top), num(xb - xa), num(L::plot_bottom - L::plot_top));
    }

    const double step = (axis.max - axis.min) / 4.0;
    const int decimals = tick_decimals(step);
    for (int k = 0; k <= 4; ++k) {
        const double v = axis.min + k * step;
        const double y = y_of(v);
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#e0e0e0\"/>\n", num(L::plot_left),
                           num(y), num(L::plot_right), num(y));
        svg += fmt::format("<text class=\"y-tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                           num(L::plot_left - 6.0), num(y + 4.0), tick_label(v, decimals));
    }
    for (std::size_t i = 0; i < series.size(); i += 12) {
        const double x = x_of(series[i].timestamp);
        const auto c = civil_time(series[i].timestamp, offset);
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#e0e0e0\"/>\n", num(x),
                           num(L::plot_top), num(x), num(L::plot_bottom));
        svg += fmt::format("<text class=\"x-tick\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:02d}-{:02d} "
                           "{:02d}:00</text>\n",
                           num(x), num(L::plot_bottom + 16.0), c.month, c.day, c.hour);
    }
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n",
                       num(L::plot_left), num(L::plot_top), num(L::plot_right - L::plot_left),
                       num(L::plot_bottom - L::plot_top));

    for (std::size_t k = 0; k < spec.parameters.size(); ++k) {
        const auto p = spec.parameters[k];
        std::string points;
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (i > 0)
                points += ' ';
            points += num(x_of(series[i].timestamp));
            points += ',';
            points += num(y_of(*parameter_value(series[i], p)));
        }
        svg += fmt::format("<polyline data-parameter=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" "
                           "points=\"{}\"/>\n",
                           parameter_name(p), kPalette[k], points);
    }
    svg += "</g>\n";

    for (std::size_t k = 0; k < spec.parameters.size(); ++k) {
        const auto p = spec.parameters[k];
        const double x = 480.0 + 100.0 * static_cast<double>(k);
        const auto unit = parameter_unit(p);
        svg += fmt::format("<line x1=\"{}\" y1=\"20\" x2=\"{}\" y2=\"20\" stroke=\"{}\" stroke-width=\"2.5\"/>\n",
                           num(x), num(x + 16.0), kPalette[k]);
        svg += fmt::format("<text x=\"{}\" y=\"24\">{}{}</text>\n", num(x + 20.0), xml_escape(parameter_name(p)),
                           unit.empty() ? std::string() : fmt::format(" ({})", xml_escape(unit)));
    }
    const double mid_y = (L::plot_top + L::plot_bottom) / 2.0;
    svg += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                       num(mid_y), xml_escape(spec.y_axis_label));
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Local time (UTC{})</text>\n",
                       num((L::plot_left + L::plot_right) / 2.0), num(L::plot_bottom + 40.0),
                       utc_offset_label(offset));
    svg += "</svg>\n";

    return RenderedChart{spec, std::move(svg), L::width, L::height};
}

std::string inline_svg(const RenderedChart& chart)
{
    const auto& s = chart.svg_text;
    if (s.rfind("<?xml", 0) == 0)
        return s.substr(s.find('\n') + 1);
    return s;
}

} // namespace chart
} // namespace meteo
