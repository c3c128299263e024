#pragma once

#include "meteo/domain.hpp"
#include "meteo/net.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace meteo::ingest {

// Unit flag of the forecast provider request (OpenWeather `units=`).
enum class UnitSystem { standard, metric, imperial };

std::string_view to_string(UnitSystem u) noexcept;
// Throws ErrorKind::config.
UnitSystem parse_unit_system(std::string_view name);

enum class SourceMode { live, fixture };

struct DataSourceConfig {
    SourceMode mode = SourceMode::fixture;
    std::string endpoint;              // live: base URL
    std::string api_key;               // live: credential, when the provider needs one
    std::filesystem::path fixture;     // fixture: recorded payload file
    UnitSystem units = UnitSystem::metric;
    int retries = 1;                   // extra attempts after a network failure or 5xx
    int horizon_hours = 120;           // forecast truncation, 1..120
    int normals_start_year = 2004;     // climatology reference period
    int normals_end_year = 2023;
    std::string user_agent = "meteo-report/1.0";
};

// Exact recorded bytes of a fixture. Throws ErrorKind::not_found or
// ErrorKind::invalid_input (directories, unreadable files).
std::string load_fixture(const std::filesystem::path& path);

// Converts one sample from the provider unit system to the internal one.
// Converting from metric is the identity.
HourlySample to_metric(const HourlySample& sample, UnitSystem from);

// Wire-format parsers. They take raw payload bytes so fixture and live
// paths share validation.
ForecastSeries parse_onecall(std::string_view payload, const LocationRef& location,
                             UnitSystem units, int horizon_hours = 120);
ClimatologyNormals parse_meteostat_normals(std::string_view payload, int default_baseline_years);
GeoContext parse_nominatim_reverse(std::string_view payload, const LocationRef& location);
// Forward search (`/search?q=`); returns the first hit as a location.
LocationRef parse_nominatim_search(std::string_view payload, std::string_view name);

// Fetch operations. In live mode they perform at most 1 + retries requests
// through `http`; in fixture mode they never touch it. When `raw_out` is
// given it receives the payload bytes that were parsed.
ForecastSeries fetch_forecast(const LocationRef& location, const DataSourceConfig& source,
                              net::HttpClient& http = net::default_client(),
                              std::string* raw_out = nullptr);
ClimatologyNormals fetch_climatology(const LocationRef& location, const DataSourceConfig& source,
                                     net::HttpClient& http = net::default_client(),
                                     std::string* raw_out = nullptr);
GeoContext fetch_geo_context(const LocationRef& location, const DataSourceConfig& source,
                             net::HttpClient& http = net::default_client(),
                             std::string* raw_out = nullptr);
LocationRef geocode(std::string_view name, const DataSourceConfig& source,
                    net::HttpClient& http = net::default_client());

// Request URLs, exposed for tests and `--debug` output.
std::string forecast_url(const LocationRef& location, const DataSourceConfig& source);
std::string climatology_url(const LocationRef& location, const DataSourceConfig& source);
std::string geo_url(const LocationRef& location, const DataSourceConfig& source);

} // namespace meteo::ingest
