#include "meteo/ingest.hpp"

#include "meteo/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace meteo::ingest {

using nlohmann::json;

namespace {

constexpr std::string_view kDefaultOpenWeather = "https://api.openweathermap.org";
constexpr std::string_view kDefaultMeteostat = "https://meteostat.p.rapidapi.com";
constexpr std::string_view kDefaultNominatim = "https://nominatim.openstreetmap.org";

json parse_json(std::string_view payload, std::string_view what)
{
    try {
        return json::parse(payload);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::schema, fmt::format("{} payload is not valid JSON: {}", what, e.what()));
    }
}

double number_field(const json& obj, std::string_view key, std::string_view ctx)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorKind::schema, fmt::format("{}: missing field '{}'", ctx, key));
    if (!it->is_number())
        throw Error(ErrorKind::schema, fmt::format("{}.{}: expected number", ctx, key));
    return it->get<double>();
}

std::optional<double> optional_number(const json& obj, std::string_view key, std::string_view ctx)
{
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return std::nullopt;
    if (!it->is_number())
        throw Error(ErrorKind::schema, fmt::format("{}.{}: expected number", ctx, key));
    return it->get<double>();
}

double precip_1h(const json& obj, std::string_view key, std::string_view ctx)
{
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return 0.0;
    if (!it->is_object())
        throw Error(ErrorKind::schema, fmt::format("{}.{}: expected object", ctx, key));
    return optional_number(*it, "1h", fmt::format("{}.{}", ctx, key)).value_or(0.0);
}

std::string base_url(const DataSourceConfig& source, std::string_view fallback)
{
    std::string base = source.endpoint.empty() ? std::string(fallback) : source.endpoint;
    while (!base.empty() && base.back() == '/')
        base.pop_back();
    return base;
}

std::string host_of(const std::string& url)
{
    const auto parts = net::split_url(url);
    return parts.scheme_host_port.substr(parts.scheme_host_port.find("://") + 3);
}

std::string acquire(const DataSourceConfig& source, const std::string& url, const net::Headers& headers,
                    net::HttpClient& http, std::string_view what)
{
    if (source.mode == SourceMode::fixture) {
        if (source.fixture.empty())
            throw Error(ErrorKind::config, fmt::format("{} source is in fixture mode but has no fixture path", what));
        return load_fixture(source.fixture);
    }

    const int attempts = 1 + std::max(0, source.retries);
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        net::HttpResponse res;
        try {
            res = http.get(url, headers);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::network)
                throw;
            last_error = e.what();
            continue;
        }
        if (res.status >= 200 && res.status < 300)
            return res.body;
        const auto excerpt = res.body.substr(0, 200);
        if (res.status == 401 || res.status == 403)
            throw Error(ErrorKind::authentication,
                        fmt::format("{} provider rejected credentials (HTTP {}): {}", what, res.status, excerpt));
        last_error = fmt::format("{} provider returned HTTP {}: {}", what, res.status, excerpt);
        if (res.status < 500)
            throw Error(ErrorKind::http_status, last_error);
    }
    throw Error(ErrorKind::network, fmt::format("{} fetch failed after {} attempt(s): {}", what, attempts, last_error));
}

std::optional<double> parse_elevation(const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        try {
            std::size_t used = 0;
            const double d = std::stod(s, &used);
            if (std::isfinite(d))
                return d;
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

std::string string_or(const json& obj, std::string_view key, std::string fallback = {})
{
    const auto it = obj.find(key);
    if (it != obj.end() && it->is_string())
        return it->get<std::string>();
    return fallback;
}

} // namespace

std::string_view to_string(UnitSystem u) noexcept
{
    switch (u) {
    case UnitSystem::standard: return "standard";
    case UnitSystem::metric: return "metric";
    case UnitSystem::imperial: return "imperial";
    }
    return "metric";
}

UnitSystem parse_unit_system(std::string_view name)
{
    if (name == "standard")
        return UnitSystem::standard;
    if (name == "metric")
        return UnitSystem::metric;
    if (name == "imperial")
        return UnitSystem::imperial;
    throw Error(ErrorKind::config, fmt::format("unknown unit system '{}' (standard|metric|imperial)", name));
}

std::string load_fixture(const std::filesystem::path& path)
{
    std::error_code ec;
    const auto status = std::filesystem::status(path, ec);
    if (ec || !std::filesystem::exists(status))
        throw Error(ErrorKind::not_found, fmt::format("fixture not found: {}", path.string()));
    if (!std::filesystem::is_regular_file(status))
        throw Error(ErrorKind::invalid_input, fmt::format("fixture is not a regular file: {}", path.string()));
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::invalid_input, fmt::format("fixture is not readable: {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

HourlySample to_metric(const HourlySample& sample, UnitSystem from)
{
    HourlySample out = sample;
    switch (from) {
    case UnitSystem::metric:
        break;
    case UnitSystem::standard:
        out.temperature -= 273.15;
        out.feels_like -= 273.15;
        out.dew_point -= 273.15;
        break;
    case UnitSystem::imperial: {
        constexpr double kMphToMs = 0.44704;
        const auto f_to_c = [](double f) { return (f - 32.0) * 5.0 / 9.0; };
        out.temperature = f_to_c(out.temperature);
        out.feels_like = f_to_c(out.feels_like);
        out.dew_point = f_to_c(out.dew_point);
        out.wind_speed *= kMphToMs;
        if (out.wind_gust)
            *out.wind_gust *= kMphToMs;
        break;
    }
    }
    return out;
}

ForecastSeries parse_onecall(std::string_view payload, const LocationRef& location, UnitSystem units,
                             int horizon_hours)
{
    if (horizon_hours < 1 || horizon_hours > static_cast<int>(ForecastSeries::kMaxSamples))
        throw Error(ErrorKind::precondition, fmt::format("horizon {} h outside [1, 120]", horizon_hours));

    const json root = parse_json(payload, "forecast");
    if (!root.is_object())
        throw Error(ErrorKind::schema, "forecast payload: expected a JSON object");
    const auto hourly = root.find("hourly");
    if (hourly == root.end() || !hourly->is_array())
        throw Error(ErrorKind::schema, "forecast payload: missing 'hourly' array");
    if (hourly->empty())
        throw Error(ErrorKind::schema, "forecast payload: 'hourly' array is empty");

    LocationRef loc = location;
    if (const auto it = root.find("timezone_offset"); it != root.end()) {
        if (!it->is_number_integer())
            throw Error(ErrorKind::schema, "forecast payload: timezone_offset must be an integer");
        loc.utc_offset_seconds = it->get<int>();
    }

    const std::size_t count = std::min(hourly->size(), static_cast<std::size_t>(horizon_hours));
    std::vector<HourlySample> samples;
    samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const json& h = (*hourly)[i];
        const auto ctx = fmt::format("hourly[{}]", i);
        if (!h.is_object())
            throw Error(ErrorKind::schema, fmt::format("{}: expected object", ctx));
        const auto dt = h.find("dt");
        if (dt == h.end() || !dt->is_number_integer())
            throw Error(ErrorKind::schema, fmt::format("{}: missing integer field 'dt'", ctx));

        HourlySample s;
        s.timestamp = dt->get<Timestamp>();
        s.temperature = number_field(h, "temp", ctx);
        s.feels_like = number_field(h, "feels_like", ctx);
        s.dew_point = number_field(h, "dew_point", ctx);
        s.humidity = number_field(h, "humidity", ctx);
        s.pressure = number_field(h, "pressure", ctx);
        s.wind_speed = number_field(h, "wind_speed", ctx);
        s.wind_gust = optional_number(h, "wind_gust", ctx);
        s.wind_dir = number_field(h, "wind_deg", ctx);
        if (s.wind_dir == 360.0)
            s.wind_dir = 0.0;
        s.precipitation = precip_1h(h, "rain", ctx) + precip_1h(h, "snow", ctx);
        s.cloud_cover = number_field(h, "clouds", ctx);
        s.visibility = optional_number(h, "visibility", ctx).value_or(10000.0);
        s.uv_index = optional_number(h, "uvi", ctx).value_or(0.0);
        s.condition_code = 0;
        if (const auto w = h.find("weather"); w != h.end()) {
            if (!w->is_array())
                throw Error(ErrorKind::schema, fmt::format("{}.weather: expected array", ctx));
            if (!w->empty()) {
                const auto id = (*w)[0].find("id");
                if (id == (*w)[0].end() || !id->is_number_integer())
                    throw Error(ErrorKind::schema, fmt::format("{}.weather[0].id: expected integer", ctx));
                s.condition_code = id->get<int>();
            }
        }
        samples.push_back(to_metric(s, units));
    }
    return ForecastSeries::create(std::move(loc), std::move(samples));
}

ClimatologyNormals parse_meteostat_normals(std::string_view payload, int default_baseline_years)
{
    const json root = parse_json(payload, "climatology");
    if (!root.is_object())
        throw Error(ErrorKind::schema, "climatology payload: expected a JSON object");
    const auto data = root.find("data");
    if (data == root.end() || !data->is_array())
        throw Error(ErrorKind::schema, "climatology payload: missing 'data' array");

    int baseline_years = default_baseline_years;
    if (const auto meta = root.find("meta"); meta != root.end() && meta->is_object()) {
        const auto start = meta->find("start");
        const auto end = meta->find("end");
        if (start != meta->end() && end != meta->end() && start->is_number_integer() && end->is_number_integer())
            baseline_years = end->get<int>() - start->get<int>() + 1;
    }

    std::vector<MonthlyNormal> months;
    for (std::size_t i = 0; i < data->size(); ++i) {
        const json& m = (*data)[i];
        const auto ctx = fmt::format("data[{}]", i);
        if (!m.is_object())
            throw Error(ErrorKind::schema, fmt::format("{}: expected object", ctx));
        const auto month = m.find("month");
        if (month == m.end() || !month->is_number_integer())
            throw Error(ErrorKind::schema, fmt::format("{}: missing integer field 'month'", ctx));
        const auto tavg = optional_number(m, "tavg", ctx);
        const auto prcp = optional_number(m, "prcp", ctx);
        if (!tavg || !prcp)
            throw Error(ErrorKind::schema,
                        fmt::format("{}: month {} lacks {}", ctx, month->get<int>(), !tavg ? "tavg" : "prcp"));
        const int month_value = month->get<int>();
        if (month_value < 1 || month_value > 12)
            throw Error(ErrorKind::invariant, fmt::format("{}: month key {} outside 1..12", ctx, month_value));
        months.push_back(MonthlyNormal{static_cast<unsigned>(month_value), *tavg, optional_number(m, "tstd", ctx),
                                       *prcp});
    }
    return ClimatologyNormals::create(std::move(months), baseline_years);
}

GeoContext parse_nominatim_reverse(std::string_view payload, const LocationRef& location)
{
    const json root = parse_json(payload, "geo");
    if (!root.is_object())
        throw Error(ErrorKind::schema, "geo payload: expected a JSON object");
    if (const auto err = root.find("error"); err != root.end())
        throw Error(ErrorKind::schema, fmt::format("geo payload reports an error: {}", err->dump()));

    const json empty = json::object();
    const auto obj_or_empty = [&](std::string_view key) -> const json& {
        const auto it = root.find(key);
        if (it == root.end() || it->is_null())
            return empty;
        if (!it->is_object())
            throw Error(ErrorKind::schema, fmt::format("geo payload: '{}' must be an object", key));
        return *it;
    };
    const json& address = obj_or_empty("address");
    const json& extratags = obj_or_empty("extratags");

    // jsonv2 calls the OSM key "category"; the classic format calls it "class".
    std::string osm_class = string_or(root, "class", string_or(root, "category"));
    const std::string osm_type = string_or(root, "type");

    std::string place;
    if (osm_class == "place")
        place = osm_type;
    else if (!string_or(extratags, "place").empty())
        place = string_or(extratags, "place");
    else if (!osm_class.empty())
        place = string_or(root, "addresstype");

    GeoContext geo;
    geo.latitude = location.latitude;
    geo.longitude = location.longitude;
    for (const auto& [key, target] : {std::pair{"lat", &geo.latitude}, std::pair{"lon", &geo.longitude}}) {
        if (const auto it = root.find(key); it != root.end())
            if (const auto v = parse_elevation(*it))
                *target = *v;
    }

    if (place == "city" || place == "town" || place == "suburb")
        geo.region_kind = RegionKind::urban;
    else if (place == "village" || place == "hamlet" || place == "farm")
        geo.region_kind = RegionKind::rural;

    if (const auto it = root.find("elevation"); it != root.end())
        geo.elevation = parse_elevation(*it);
    if (!geo.elevation)
        if (const auto it = extratags.find("ele"); it != extratags.end())
            geo.elevation = parse_elevation(*it);

    std::optional<double> coast_km;
    if (const auto it = root.find("distance_to_coast_km"); it != root.end())
        coast_km = parse_elevation(*it);

    const bool coastline = (osm_class == "natural" && osm_type == "coastline") ||
                           string_or(extratags, "natural") == "coastline";
    if (coastline || (coast_km && *coast_km < 10.0))
        geo.terrain_kind = TerrainKind::coastal;
    else if (geo.elevation && *geo.elevation > 1500.0)
        geo.terrain_kind = TerrainKind::mountain;
    else if (!osm_class.empty() || geo.elevation || coast_km)
        geo.terrain_kind = TerrainKind::inland;

    geo.place_name = string_or(root, "name");
    for (const char* key : {"city", "town", "village", "hamlet", "suburb", "municipality", "county", "state"}) {
        if (!geo.place_name.empty())
            break;
        geo.place_name = string_or(address, key);
    }
    if (geo.place_name.empty()) {
        const auto display = string_or(root, "display_name");
        geo.place_name = display.substr(0, display.find(','));
    }
    if (geo.place_name.empty())
        geo.place_name = location.name;

    try {
        validate_geo(geo);
    } catch (const Error& e) {
        throw Error(ErrorKind::invariant, fmt::format("geo payload: {}", e.what()));
    }
    return geo;
}

LocationRef parse_nominatim_search(std::string_view payload, std::string_view name)
{
    const json root = parse_json(payload, "geocode");
    if (!root.is_array())
        throw Error(ErrorKind::schema, "geocode payload: expected a JSON array");
    if (root.empty())
        throw Error(ErrorKind::not_found, fmt::format("no geocoding result for '{}'", name));
    const json& hit = root.front();
    LocationRef loc;
    loc.name = std::string(name);
    const auto lat = hit.is_object() && hit.contains("lat") ? parse_elevation(hit["lat"]) : std::nullopt;
    const auto lon = hit.is_object() && hit.contains("lon") ? parse_elevation(hit["lon"]) : std::nullopt;
    if (!lat || !lon)
        throw Error(ErrorKind::schema, "geocode payload: first result lacks lat/lon");
    loc.latitude = *lat;
    loc.longitude = *lon;
    validate_location(loc);
    return loc;
}

std::string forecast_url(const LocationRef& location, const DataSourceConfig& source)
{
    return fmt::format("{}/data/2.5/onecall?lat={:.4f}&lon={:.4f}&exclude=current,minutely,daily,alerts&units={}"
                       "&appid={}",
                       base_url(source, kDefaultOpenWeather), location.latitude, location.longitude,
                       to_string(source.units), net::url_encode(source.api_key));
}

std::string climatology_url(const LocationRef& location, const DataSourceConfig& source)
{
    return fmt::format("{}/point/normals?lat={:.4f}&lon={:.4f}&start={}&end={}", base_url(source, kDefaultMeteostat),
                       location.latitude, location.longitude, source.normals_start_year, source.normals_end_year);
}

std::string geo_url(const LocationRef& location, const DataSourceConfig& source)
{
    return fmt::format("{}/reverse?format=jsonv2&lat={:.4f}&lon={:.4f}&zoom=14&addressdetails=1&extratags=1",
                       base_url(source, kDefaultNominatim), location.latitude, location.longitude);
}

ForecastSeries fetch_forecast(const LocationRef& location, const DataSourceConfig& source, net::HttpClient& http,
                              std::string* raw_out)
{
    validate_location(location);
    if (source.mode == SourceMode::live && source.api_key.empty())
        throw Error(ErrorKind::config, "live forecast source requires OPENWEATHER_API_KEY");
    auto raw = acquire(source, forecast_url(location, source), {}, http, "forecast");
    auto series = parse_onecall(raw, location, source.units, source.horizon_hours);
    if (raw_out)
        *raw_out = std::move(raw);
    return series;
}

ClimatologyNormals fetch_climatology(const LocationRef& location, const DataSourceConfig& source,
                                     net::HttpClient& http, std::string* raw_out)
{
    validate_location(location);
    const auto url = climatology_url(location, source);
    net::Headers headers;
    if (source.mode == SourceMode::live) {
        if (!source.api_key.empty())
            headers.emplace_back("x-rapidapi-key", source.api_key);
        headers.emplace_back("x-rapidapi-host", host_of(url));
    }
    auto raw = acquire(source, url, headers, http, "climatology");
    auto normals =
        parse_meteostat_normals(raw, source.normals_end_year - source.normals_start_year + 1);
    if (raw_out)
        *raw_out = std::move(raw);
    return normals;
}

GeoContext fetch_geo_context(const LocationRef& location, const DataSourceConfig& source, net::HttpClient& http,
                             std::string* raw_out)
{
    validate_location(location);
    auto raw = acquire(source, geo_url(location, source), {{"User-Agent", source.user_agent}}, http, "geo");
    auto geo = parse_nominatim_reverse(raw, location);
    if (raw_out)
        *raw_out = std::move(raw);
    return geo;
}

LocationRef geocode(std::string_view name, const DataSourceConfig& source, net::HttpClient& http)
{
    const auto url =
        fmt::format("{}/search?format=jsonv2&limit=1&q={}", base_url(source, kDefaultNominatim), net::url_encode(name));
    const auto raw = acquire(source, url, {{"User-Agent", source.user_agent}}, http, "geocode");
    return parse_nominatim_search(raw, name);
}

} // namespace meteo::ingest
