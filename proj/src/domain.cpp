#include "meteo/domain.hpp"

#include "meteo/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace meteo {

void validate_location(const LocationRef& location)
{
    if (!std::isfinite(location.latitude) || location.latitude < -90.0 || location.latitude > 90.0)
        throw Error(ErrorKind::precondition,
                    fmt::format("latitude {} outside [-90, 90]", location.latitude));
    if (!std::isfinite(location.longitude) || location.longitude < -180.0 || location.longitude > 180.0)
        throw Error(ErrorKind::precondition,
                    fmt::format("longitude {} outside [-180, 180]", location.longitude));
}

namespace {

void check_range(const HourlySample& s, std::string_view field, double value, double lo, double hi,
                 bool hi_open = false)
{
    const bool ok = std::isfinite(value) && value >= lo && (hi_open ? value < hi : value <= hi);
    if (!ok)
        throw Error(ErrorKind::invariant,
                    fmt::format("{} = {} outside {}{}, {}{} at {} (dt={})", field, value, '[', lo, hi,
                                hi_open ? ')' : ']', iso_utc(s.timestamp), s.timestamp));
}

void check_finite(const HourlySample& s, std::string_view field, double value)
{
    if (!std::isfinite(value))
        throw Error(ErrorKind::invariant,
                    fmt::format("{} is not finite at {} (dt={})", field, iso_utc(s.timestamp), s.timestamp));
}

constexpr double kInf = HUGE_VAL;

} // namespace

void validate_sample(const HourlySample& s)
{
    check_finite(s, "temperature", s.temperature);
    check_finite(s, "feels_like", s.feels_like);
    check_finite(s, "dew_point", s.dew_point);
    check_range(s, "humidity", s.humidity, 0.0, 100.0);
    check_range(s, "pressure", s.pressure, 850.0, 1100.0);
    check_range(s, "wind_speed", s.wind_speed, 0.0, kInf, true);
    if (s.wind_gust)
        check_range(s, "wind_gust", *s.wind_gust, 0.0, kInf, true);
    check_range(s, "wind_dir", s.wind_dir, 0.0, 360.0, true);
    check_range(s, "precipitation", s.precipitation, 0.0, kInf, true);
    check_range(s, "cloud_cover", s.cloud_cover, 0.0, 100.0);
    check_range(s, "visibility", s.visibility, 0.0, kInf, true);
    check_range(s, "uv_index", s.uv_index, 0.0, kInf, true);
}

std::string_view parameter_name(Parameter p) noexcept
{
    switch (p) {
    case Parameter::temperature: return "temperature";
    case Parameter::feels_like: return "feels_like";
    case Parameter::dew_point: return "dew_point";
    case Parameter::humidity: return "humidity";
    case Parameter::pressure: return "pressure";
    case Parameter::wind_speed: return "wind_speed";
    case Parameter::wind_gust: return "wind_gust";
    case Parameter::wind_dir: return "wind_dir";
    case Parameter::precipitation: return "precipitation";
    case Parameter::cloud_cover: return "cloud_cover";
    case Parameter::visibility: return "visibility";
    case Parameter::uv_index: return "uv_index";
    case Parameter::condition_code: return "condition_code";
    }
    return "";
}

std::string_view parameter_unit(Parameter p) noexcept
{
    switch (p) {
    case Parameter::temperature:
    case Parameter::feels_like:
    case Parameter::dew_point: return "°C";
    case Parameter::humidity:
    case Parameter::cloud_cover: return "%";
    case Parameter::pressure: return "hPa";
    case Parameter::wind_speed:
    case Parameter::wind_gust: return "m/s";
    case Parameter::wind_dir: return "°";
    case Parameter::precipitation: return "mm/h";
    case Parameter::visibility: return "m";
    case Parameter::uv_index:
    case Parameter::condition_code: return "";
    }
    return "";
}

std::optional<Parameter> find_parameter(std::string_view name) noexcept
{
    for (const auto p : kAllParameters)
        if (parameter_name(p) == name)
            return p;
    return std::nullopt;
}

Parameter parse_parameter(std::string_view name)
{
    if (const auto p = find_parameter(name))
        return *p;
    throw Error(ErrorKind::unknown_parameter, fmt::format("unknown parameter '{}'", name));
}

std::optional<double> parameter_value(const HourlySample& s, Parameter p) noexcept
{
    switch (p) {
    case Parameter::temperature: return s.temperature;
    case Parameter::feels_like: return s.feels_like;
    case Parameter::dew_point: return s.dew_point;
    case Parameter::humidity: return s.humidity;
    case Parameter::pressure: return s.pressure;
    case Parameter::wind_speed: return s.wind_speed;
    case Parameter::wind_gust: return s.wind_gust;
    case Parameter::wind_dir: return s.wind_dir;
    case Parameter::precipitation: return s.precipitation;
    case Parameter::cloud_cover: return s.cloud_cover;
    case Parameter::visibility: return s.visibility;
    case Parameter::uv_index: return s.uv_index;
    case Parameter::condition_code: return static_cast<double>(s.condition_code);
    }
    return std::nullopt;
}

ForecastSeries ForecastSeries::create(LocationRef location, std::vector<HourlySample> samples)
{
    if (samples.empty())
        throw Error(ErrorKind::invariant, "forecast series is empty");
    if (samples.size() > kMaxSamples)
        throw Error(ErrorKind::invariant,
                    fmt::format("forecast series has {} samples, at most {} allowed", samples.size(), kMaxSamples));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        validate_sample(samples[i]);
        if (i == 0)
            continue;
        const Timestamp prev = samples[i - 1].timestamp;
        const Timestamp cur = samples[i].timestamp;
        if (cur <= prev)
            throw Error(ErrorKind::gap, fmt::format("timestamps not strictly increasing at index {}: {} after {}", i,
                                                    iso_utc(cur), iso_utc(prev)));
        if (cur - prev != kSecondsPerHour)
            throw Error(ErrorKind::gap,
                        fmt::format("hourly gap: missing {} (dt={}) between samples {} and {}",
                                    iso_utc(prev + kSecondsPerHour), prev + kSecondsPerHour, i - 1, i));
    }
    return ForecastSeries(std::move(location), std::move(samples));
}

std::optional<std::size_t> ForecastSeries::index_of(Timestamp t) const noexcept
{
    if (t < start() || t > end() || (t - start()) % kSecondsPerHour != 0)
        return std::nullopt;
    return static_cast<std::size_t>((t - start()) / kSecondsPerHour);
}

ClimatologyNormals ClimatologyNormals::create(std::vector<MonthlyNormal> months, int baseline_years)
{
    if (baseline_years < 1)
        throw Error(ErrorKind::invariant, fmt::format("baseline_years = {} must be >= 1", baseline_years));
    ClimatologyNormals out;
    out.baseline_years_ = baseline_years;
    std::array<bool, 12> seen{};
    for (const auto& m : months) {
        if (m.month < 1 || m.month > 12)
            throw Error(ErrorKind::invariant, fmt::format("month key {} outside 1..12", m.month));
        if (seen[m.month - 1])
            throw Error(ErrorKind::invariant, fmt::format("duplicate month key {}", m.month));
        seen[m.month - 1] = true;
        if (!std::isfinite(m.mean_temperature))
            throw Error(ErrorKind::invariant, fmt::format("month {}: mean temperature not finite", m.month));
        if (!std::isfinite(m.total_precipitation) || m.total_precipitation < 0.0)
            throw Error(ErrorKind::invariant,
                        fmt::format("month {}: total precipitation {} must be >= 0", m.month, m.total_precipitation));
        if (m.temperature_std && (!std::isfinite(*m.temperature_std) || *m.temperature_std <= 0.0))
            throw Error(ErrorKind::invariant,
                        fmt::format("month {}: temperature std {} must be > 0", m.month, *m.temperature_std));
        out.months_[m.month - 1] = m;
    }
    const auto present = std::count(seen.begin(), seen.end(), true);
    if (present != 12) {
        const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin() + 1;
        throw Error(ErrorKind::incomplete,
                    fmt::format("climatology normals incomplete: {} of 12 months present (month {} missing)",
                                present, missing));
    }
    return out;
}

const MonthlyNormal& ClimatologyNormals::month(unsigned m) const
{
    if (m < 1 || m > 12)
        throw Error(ErrorKind::missing_month, fmt::format("no normals for month {}", m));
    return months_[m - 1];
}

std::string_view to_string(RegionKind k) noexcept
{
    switch (k) {
    case RegionKind::urban: return "urban";
    case RegionKind::rural: return "rural";
    case RegionKind::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(TerrainKind k) noexcept
{
    switch (k) {
    case TerrainKind::coastal: return "coastal";
    case TerrainKind::inland: return "inland";
    case TerrainKind::mountain: return "mountain";
    case TerrainKind::unknown: return "unknown";
    }
    return "unknown";
}

void validate_geo(const GeoContext& geo)
{
    validate_location(LocationRef{geo.place_name, geo.latitude, geo.longitude, 0});
    if (geo.elevation && !std::isfinite(*geo.elevation))
        throw Error(ErrorKind::invariant, "elevation is not finite");
}

} // namespace meteo
