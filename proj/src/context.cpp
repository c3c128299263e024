#include "meteo/context.hpp"

#include <fmt/format.h>

#include <cmath>

namespace meteo::context {

using diagnostics::AnomalyReport;
using diagnostics::FrontEvent;
using diagnostics::HazardWarning;

std::string fixed(double value, int decimals)
{
    auto s = fmt::format("{:.{}f}", value, decimals);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

int estimate_tokens(std::string_view text)
{
    std::size_t code_points = 0;
    for (const unsigned char c : text)
        if ((c & 0xC0) != 0x80)
            ++code_points;
    return static_cast<int>((code_points + 3) / 4);
}

std::string render_sections(std::span<const InfoSection> sections)
{
    std::string out;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i > 0)
            out += '\n';
        out += fmt::format("== {} ==\nsource: {}\n", sections[i].name, sections[i].source_tag);
        out += sections[i].payload;
    }
    return out;
}

namespace {

std::string signed_fixed(double value, int decimals)
{
    auto s = fixed(value, decimals);
    if (s.front() != '-')
        s.insert(0, "+");
    return s;
}

std::string location_section(const ForecastSeries& series, const GeoContext& geo)
{
    std::string out;
    out += fmt::format("name: {}\n", geo.place_name);
    out += fmt::format("coordinates: {}, {}\n", fixed(geo.latitude, 4), fixed(geo.longitude, 4));
    out += fmt::format("region: {}\n", to_string(geo.region_kind));
    out += fmt::format("terrain: {}\n", to_string(geo.terrain_kind));
    out += fmt::format("elevation: {}\n", geo.elevation ? fixed(*geo.elevation, 0) + " m" : std::string("n/a"));
    out += fmt::format("utc_offset: {}\n", utc_offset_label(series.location().utc_offset_seconds));
    out += fmt::format("forecast_window: {} .. {} ({} h)\n", iso_utc(series.start()), iso_utc(series.end()),
                       series.size());
    return out;
}

std::string climatology_section(const ForecastSeries& series, const ClimatologyNormals& normals)
{
    const auto spans = diagnostics::month_spans(series);
    std::string out;
    out += fmt::format("baseline: {}-year monthly normals\n", normals.baseline_years());
    out += fmt::format("{:<8} {:>11} {:>10} {:>10} {:>12}\n", "month", "mean_temp_c", "temp_std_c", "precip_mm",
                       "series_hours");
    double temp = 0.0;
    double precip = 0.0;
    bool have_std = true;
    for (const auto& span : spans) {
        const auto& m = normals.month(span.month);
        out += fmt::format("{:04d}-{:02d} {:>11} {:>10} {:>10} {:>12}\n", span.year, span.month,
                           fixed(m.mean_temperature, 1), m.temperature_std ? fixed(*m.temperature_std, 1) : "-",
                           fixed(m.total_precipitation, 1), span.hours);
        temp += span.hours * m.mean_temperature;
        precip += span.hours * m.total_precipitation;
        have_std = have_std && m.temperature_std.has_value();
    }
    const double hours = static_cast<double>(series.size());
    out += fmt::format("blended_baseline_temperature_c: {}\n", fixed(temp / hours, 2));
    out += fmt::format("blended_baseline_precipitation_mm_per_month: {}\n", fixed(precip / hours, 2));
    out += have_std ? "dispersion: monthly temperature std available; percentiles assume a normal distribution\n"
                    : "dispersion: not available; anomalies use fixed deviation bands\n";
    return out;
}

} // namespace

std::string forecast_table(const ForecastSeries& series)
{
    const int offset = series.location().utc_offset_seconds;
    std::string out;
    out += "units: temp/feels/dewpt C, hum %, press hPa, wind/gust m/s, dir deg (from), precip mm/h, cloud %, vis m, "
           "uvi index, code provider condition id\n";
    out += fmt::format("{:<17} {:<16} {:>6} {:>6} {:>6} {:>4} {:>5} {:>5} {:>5} {:>4} {:>6} {:>5} {:>6} {:>5} {:>4}\n",
                       "time_utc", "local", "temp", "feels", "dewpt", "hum", "press", "wind", "gust", "dir", "precip",
                       "cloud", "vis", "uvi", "code");
    for (const auto& s : series.samples()) {
        out += fmt::format(
            "{:<17} {:<16} {:>6} {:>6} {:>6} {:>4} {:>5} {:>5} {:>5} {:>4} {:>6} {:>5} {:>6} {:>5} {:>4}\n",
            iso_utc(s.timestamp), local_time(s.timestamp, offset), fixed(s.temperature, 1), fixed(s.feels_like, 1),
            fixed(s.dew_point, 1), fixed(s.humidity, 0), fixed(s.pressure, 0), fixed(s.wind_speed, 1),
            s.wind_gust ? fixed(*s.wind_gust, 1) : "-", fixed(s.wind_dir, 0), fixed(s.precipitation, 1),
            fixed(s.cloud_cover, 0), fixed(s.visibility, 0), fixed(s.uv_index, 1), s.condition_code);
    }
    return out;
}

std::string diagnostics_lines(std::span<const FrontEvent> fronts, std::span<const AnomalyReport> anomalies,
                              std::span<const HazardWarning> hazards)
{
    if (fronts.empty() && anomalies.empty() && hazards.empty())
        return "none detected\n";

    std::string out;
    if (fronts.empty())
        out += "FRONT none detected\n";
    for (const auto& f : fronts) {
        out += fmt::format("FRONT {} onset={} window={}..{} pressure_tendency_min={} hPa/h wind_veer={} deg "
                           "temp_drop={} C evidence={}\n",
                           to_string(f.kind), iso_utc(f.onset), iso_utc(f.window.start), iso_utc(f.window.end),
                           fixed(f.pressure_tendency_min, 2), signed_fixed(f.wind_veer_total, 0), fixed(f.temp_drop, 1),
                           fixed(f.evidence_score, 2));
    }
    for (const auto& a : anomalies) {
        const bool temp = a.parameter == diagnostics::AnomalyParameter::temperature;
        const char* unit = temp ? "C" : "mm/month";
        out += fmt::format("ANOMALY {} aggregate={} {} baseline={} {} deviation={} {} z={} percentile={} severity={}\n",
                           to_string(a.parameter), fixed(a.forecast_aggregate, 2), unit, fixed(a.baseline_mean, 2),
                           unit, signed_fixed(a.deviation, 2), unit, a.z_score ? signed_fixed(*a.z_score, 2) : "n/a",
                           a.percentile ? fixed(*a.percentile, 1) : "n/a", to_string(a.severity));
    }
    if (hazards.empty())
        out += "HAZARD none detected\n";
    for (const auto& h : hazards) {
        out += fmt::format("HAZARD {} severity={} range={}..{} triggers={} rationale=\"{}\"\n", to_string(h.kind),
                           to_string(h.severity), iso_utc(h.time_range.start), iso_utc(h.time_range.end),
                           h.triggering_values.size(), h.rationale);
    }
    return out;
}

ExternalInfoBlock build_external_info(const ForecastSeries& series, const ClimatologyNormals& normals,
                                      const GeoContext& geo, std::span<const FrontEvent> fronts,
                                      std::span<const AnomalyReport> anomalies,
                                      std::span<const HazardWarning> hazards, const ContextOptions& options)
{
    ExternalInfoBlock block;
    block.sections = {
        {"LOCATION", "nominatim", location_section(series, geo)},
        {"FORECAST TABLE", "openweather", forecast_table(series)},
        {"CLIMATOLOGY INFO", "meteostat", climatology_section(series, normals)},
        {"DIAGNOSTICS", "diagnostics", diagnostics_lines(fronts, anomalies, hazards)},
    };
    block.rendered_text = render_sections(block.sections);
    block.token_estimate = estimate_tokens(block.rendered_text);
    block.over_budget = block.token_estimate > options.token_budget;
    return block;
}

} // namespace meteo::context
