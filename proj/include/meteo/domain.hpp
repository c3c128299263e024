#pragma once

#include "meteo/time.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meteo {

struct LocationRef {
    std::string name;
    double latitude = 0.0;
    double longitude = 0.0;
    int utc_offset_seconds = 0;

    bool operator==(const LocationRef&) const = default;
};

// Throws ErrorKind::precondition when the coordinates are out of range.
void validate_location(const LocationRef& location);

// One hour of forecast in the internal unit set:
// degC, hPa, m/s, mm/h, metres, UTC epoch seconds.
struct HourlySample {
    Timestamp timestamp = 0;
    double temperature = 0.0;
    double feels_like = 0.0;
    double dew_point = 0.0;
    double humidity = 0.0;
    double pressure = 1013.0;
    double wind_speed = 0.0;
    std::optional<double> wind_gust;
    double wind_dir = 0.0;
    double precipitation = 0.0;
    double cloud_cover = 0.0;
    double visibility = 10000.0;
    double uv_index = 0.0;
    int condition_code = 800;

    bool operator==(const HourlySample&) const = default;
};

// Throws ErrorKind::invariant naming the offending field and timestamp.
void validate_sample(const HourlySample& sample);

// The forecast parameter set, in forecast-table column order.
enum class Parameter {
    temperature,
    feels_like,
    dew_point,
    humidity,
    pressure,
    wind_speed,
    wind_gust,
    wind_dir,
    precipitation,
    cloud_cover,
    visibility,
    uv_index,
    condition_code,
};

inline constexpr std::array kAllParameters{
    Parameter::temperature, Parameter::feels_like,    Parameter::dew_point,
    Parameter::humidity,    Parameter::pressure,      Parameter::wind_speed,
    Parameter::wind_gust,   Parameter::wind_dir,      Parameter::precipitation,
    Parameter::cloud_cover, Parameter::visibility,    Parameter::uv_index,
    Parameter::condition_code,
};

std::string_view parameter_name(Parameter p) noexcept;
std::string_view parameter_unit(Parameter p) noexcept;
std::optional<Parameter> find_parameter(std::string_view name) noexcept;
// Throws ErrorKind::unknown_parameter.
Parameter parse_parameter(std::string_view name);
// nullopt only for a missing optional field (wind_gust).
std::optional<double> parameter_value(const HourlySample& s, Parameter p) noexcept;

// Validated, immutable hourly series. Samples are uniformly spaced one hour
// apart, 1..120 of them.
class ForecastSeries {
public:
    static constexpr std::size_t kMaxSamples = 120;

    // Throws ErrorKind::gap for spacing problems and ErrorKind::invariant
    // for everything else.
    static ForecastSeries create(LocationRef location, std::vector<HourlySample> samples);

    const LocationRef& location() const noexcept { return location_; }
    std::span<const HourlySample> samples() const noexcept { return samples_; }
    const HourlySample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    int horizon_hours() const noexcept { return static_cast<int>(samples_.size()); }
    Timestamp start() const noexcept { return samples_.front().timestamp; }
    Timestamp end() const noexcept { return samples_.back().timestamp; }

    // Index of the sample at `t`, if `t` lies on the hourly grid.
    std::optional<std::size_t> index_of(Timestamp t) const noexcept;

    bool operator==(const ForecastSeries&) const = default;

private:
    ForecastSeries(LocationRef location, std::vector<HourlySample> samples)
        : location_(std::move(location)), samples_(std::move(samples)) {}

    LocationRef location_;
    std::vector<HourlySample> samples_;
};

struct MonthlyNormal {
    unsigned month = 1; // 1..12
    double mean_temperature = 0.0;
    std::optional<double> temperature_std;
    double total_precipitation = 0.0; // mm/month

    bool operator==(const MonthlyNormal&) const = default;
};

class ClimatologyNormals {
public:
    // Throws ErrorKind::incomplete when fewer than 12 months are present and
    // ErrorKind::invariant for duplicates, bad months or negative values.
    static ClimatologyNormals create(std::vector<MonthlyNormal> months, int baseline_years);

    const MonthlyNormal& month(unsigned m) const;
    std::span<const MonthlyNormal> months() const noexcept { return months_; }
    int baseline_years() const noexcept { return baseline_years_; }

    bool operator==(const ClimatologyNormals&) const = default;

private:
    ClimatologyNormals() = default;

    std::array<MonthlyNormal, 12> months_{};
    int baseline_years_ = 0;
};

enum class RegionKind { urban, rural, unknown };
enum class TerrainKind { coastal, inland, mountain, unknown };

std::string_view to_string(RegionKind k) noexcept;
std::string_view to_string(TerrainKind k) noexcept;

struct GeoContext {
    std::string place_name;
    double latitude = 0.0;
    double longitude = 0.0;
    RegionKind region_kind = RegionKind::unknown;
    TerrainKind terrain_kind = TerrainKind::unknown;
    std::optional<double> elevation;

    bool operator==(const GeoContext&) const = default;
};

void validate_geo(const GeoContext& geo);

} // namespace meteo
