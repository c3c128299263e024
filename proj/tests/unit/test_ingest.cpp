#include "support.hpp"

#include "meteo/error.hpp"
#include "meteo/ingest.hpp"

#include <catch_amalgamated.hpp>

using namespace meteo;
using namespace testing;
namespace ig = meteo::ingest;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::config;
}

const LocationRef kKiel{"Kiel", 54.3227, 10.1356, 0};

} // namespace

TEST_CASE("load_fixture returns the recorded bytes", "[ingest]")
{
    const auto path = fixture_dir() / "canonical" / "forecast.json";
    const auto bytes = ig::load_fixture(path);
    CHECK(bytes.size() == fs::file_size(path));
    CHECK(bytes == read_file(path));
}

TEST_CASE("load_fixture classifies missing files and directories", "[ingest]")
{
    CHECK(kind_of([] { ig::load_fixture(fixture_dir() / "nope.json"); }) == ErrorKind::not_found);
    CHECK(kind_of([] { ig::load_fixture(fixture_dir()); }) == ErrorKind::invalid_input);
}

TEST_CASE("every manifest case matches its expected object or error", "[ingest]")
{
    const auto manifest = json::parse(read_file(data_dir() / "ingest" / "manifest.json"));
    std::map<std::string, int> per_source, malformed;
    for (const auto& entry : manifest.at("cases")) {
        INFO(entry.at("file").get<std::string>());
        CHECK(run_ingest_case(manifest, entry) == "");
        ++per_source[entry.at("source")];
        if (entry.contains("error"))
            ++malformed[entry.at("source")];
    }
    for (const char* source : {"forecast", "climatology", "geo"}) {
        CHECK(per_source[source] >= 3);
        CHECK(malformed[source] >= 1);
    }
}

TEST_CASE("to_metric conversions", "[ingest]")
{
    HourlySample s = calm_sample(0);
    s.temperature = 293.15;
    s.feels_like = 273.15;
    s.dew_point = 283.15;
    const auto k = ig::to_metric(s, ig::UnitSystem::standard);
    CHECK(k.temperature == Catch::Approx(20.0).margin(1e-12));
    CHECK(k.feels_like == Catch::Approx(0.0).margin(1e-12));
    CHECK(k.wind_speed == s.wind_speed);

    HourlySample f = calm_sample(0);
    f.temperature = 212.0;
    f.feels_like = 32.0;
    f.dew_point = -40.0;
    f.wind_speed = 10.0;
    f.wind_gust = 20.0;
    const auto m = ig::to_metric(f, ig::UnitSystem::imperial);
    CHECK(m.temperature == Catch::Approx(100.0));
    CHECK(m.feels_like == Catch::Approx(0.0).margin(1e-12));
    CHECK(m.dew_point == Catch::Approx(-40.0));
    CHECK(m.wind_speed == Catch::Approx(4.4704));
    CHECK(*m.wind_gust == Catch::Approx(8.9408));

    CHECK(ig::to_metric(f, ig::UnitSystem::metric) == f);
}

TEST_CASE("unit systems parse by name", "[ingest]")
{
    CHECK(ig::parse_unit_system("imperial") == ig::UnitSystem::imperial);
    CHECK(ig::to_string(ig::UnitSystem::standard) == "standard");
    CHECK(kind_of([] { ig::parse_unit_system("furlongs"); }) == ErrorKind::config);
}

TEST_CASE("horizon truncates the hourly array", "[ingest]")
{
    const auto payload = read_file(fixture_dir() / "canonical" / "forecast.json");
    CHECK(ig::parse_onecall(payload, kKiel, ig::UnitSystem::metric, 12).size() == 12);
    CHECK(ig::parse_onecall(payload, kKiel, ig::UnitSystem::metric, 120).size() == 48);
    CHECK(kind_of([&] { ig::parse_onecall(payload, kKiel, ig::UnitSystem::metric, 121); }) ==
          ErrorKind::precondition);
}

TEST_CASE("parse_onecall round-trips a generated payload exactly", "[ingest]")
{
    std::mt19937_64 rng(7);
    const auto series = random_series(rng, 40, true);
    const auto parsed = ig::parse_onecall(onecall_payload(series, ig::UnitSystem::metric), series.location(),
                                          ig::UnitSystem::metric);
    CHECK(parsed == series);
}

TEST_CASE("series invariants are enforced", "[ingest]")
{
    SeriesSpec spec;
    spec.hours = 3;
    auto good = make_series(spec);
    std::vector<HourlySample> samples(good.samples().begin(), good.samples().end());

    auto gap = samples;
    gap[2].timestamp += 3600;
    CHECK(kind_of([&] { ForecastSeries::create(good.location(), gap); }) == ErrorKind::gap);

    auto humid = samples;
    humid[1].humidity = 140.0;
    CHECK(kind_of([&] { ForecastSeries::create(good.location(), humid); }) == ErrorKind::invariant);

    CHECK(kind_of([&] { ForecastSeries::create(good.location(), {}); }) == ErrorKind::invariant);
}

TEST_CASE("climatology needs twelve distinct months", "[ingest]")
{
    std::vector<MonthlyNormal> months;
    for (unsigned m = 1; m <= 11; ++m)
        months.push_back({m, 10.0, std::nullopt, 50.0});
    CHECK(kind_of([&] { ClimatologyNormals::create(months, 20); }) == ErrorKind::incomplete);
    months.push_back({11, 10.0, std::nullopt, 50.0});
    CHECK(kind_of([&] { ClimatologyNormals::create(months, 20); }) == ErrorKind::invariant);
    months.back().month = 12;
    CHECK(ClimatologyNormals::create(months, 20).month(12).total_precipitation == 50.0);
}

TEST_CASE("latitude out of range fails before any request", "[ingest]")
{
    RefusingHttpClient http;
    ig::DataSourceConfig src;
    src.mode = ig::SourceMode::live;
    src.api_key = "k";
    const LocationRef bad{"x", 95.0, 10.0, 0};
    CHECK(kind_of([&] { ig::fetch_forecast(bad, src, http); }) == ErrorKind::precondition);
    CHECK(kind_of([&] { ig::fetch_climatology(bad, src, http); }) == ErrorKind::precondition);
    CHECK(kind_of([&] { ig::fetch_geo_context(bad, src, http); }) == ErrorKind::precondition);
    CHECK(http.calls() == 0);
}

TEST_CASE("fixture mode never touches the transport", "[ingest]")
{
    RefusingHttpClient http;
    ig::DataSourceConfig src;
    src.mode = ig::SourceMode::fixture;
    src.fixture = fixture_dir() / "canonical" / "forecast.json";
    std::string raw;
    const auto series = ig::fetch_forecast(kKiel, src, http, &raw);
    CHECK(series.size() == 48);
    CHECK(raw == read_file(src.fixture));
    CHECK(http.calls() == 0);
}

TEST_CASE("live fetch retries 5xx once and then succeeds", "[ingest]")
{
    const auto body = read_file(fixture_dir() / "canonical" / "forecast.json");
    ScriptedHttpClient http({{503, "busy"}, {200, body}});
    ig::DataSourceConfig src;
    src.mode = ig::SourceMode::live;
    src.api_key = "secret key";
    src.endpoint = "http://127.0.0.1:9";
    const auto series = ig::fetch_forecast(kKiel, src, http);
    CHECK(series.size() == 48);
    REQUIRE(http.requests.size() == 2);
    CHECK(http.requests[0].url.find("lat=54.3227&lon=10.1356") != std::string::npos);
    CHECK(http.requests[0].url.find("units=metric") != std::string::npos);
    CHECK(http.requests[0].url.find("appid=secret%20key") != std::string::npos);
}

TEST_CASE("live fetch failures are classified", "[ingest]")
{
    ig::DataSourceConfig src;
    src.mode = ig::SourceMode::live;
    src.api_key = "k";
    src.retries = 1;
    {
        ScriptedHttpClient http({{401, "{\"cod\":401}"}});
        CHECK(kind_of([&] { ig::fetch_forecast(kKiel, src, http); }) == ErrorKind::authentication);
        CHECK(http.requests.size() == 1);
    }
    {
        ScriptedHttpClient http({{404, "nope"}});
        CHECK(kind_of([&] { ig::fetch_geo_context(kKiel, src, http); }) == ErrorKind::http_status);
    }
    {
        ScriptedHttpClient http({{500, "a"}, {502, "b"}, {200, "{}"}});
        CHECK(kind_of([&] { ig::fetch_climatology(kKiel, src, http); }) == ErrorKind::network);
        CHECK(http.requests.size() == 2);
    }
    {
        ScriptedHttpClient http({{0, ""}});
        CHECK(kind_of([&] { ig::fetch_geo_context(kKiel, src, http); }) == ErrorKind::network);
    }
    {
        ig::DataSourceConfig nokey = src;
        nokey.api_key.clear();
        RefusingHttpClient http;
        CHECK(kind_of([&] { ig::fetch_forecast(kKiel, nokey, http); }) == ErrorKind::config);
        CHECK(http.calls() == 0);
    }
}

TEST_CASE("climatology and geo requests carry their headers", "[ingest]")
{
    ig::DataSourceConfig src;
    src.mode = ig::SourceMode::live;
    src.api_key = "rk";
    src.endpoint = "https://meteostat.example.com";
    ScriptedHttpClient http({{200, read_file(fixture_dir() / "canonical" / "climatology.json")},
                             {200, read_file(fixture_dir() / "canonical" / "geo.json")}});
    ig::fetch_climatology(kKiel, src, http);
    ig::fetch_geo_context(kKiel, src, http);
    REQUIRE(http.requests.size() == 2);
    CHECK(http.requests[0].url.find("start=2004&end=2023") != std::string::npos);
    const auto has = [](const net::Headers& h, const std::string& k, const std::string& v) {
        return std::find(h.begin(), h.end(), std::pair{k, v}) != h.end();
    };
    CHECK(has(http.requests[0].headers, "x-rapidapi-key", "rk"));
    CHECK(has(http.requests[0].headers, "x-rapidapi-host", "meteostat.example.com"));
    CHECK(has(http.requests[1].headers, "User-Agent", "meteo-report/1.0"));
}

TEST_CASE("geocode picks the first search hit", "[ingest]")
{
    const auto loc = ig::parse_nominatim_search(read_file(fixture_dir() / "canonical" / "geocode.json"), "Kiel");
    CHECK(loc.name == "Kiel");
    CHECK(loc.latitude == Catch::Approx(54.3227085));
    CHECK(loc.longitude == Catch::Approx(10.135555));
    CHECK(kind_of([] { ig::parse_nominatim_search("[]", "Nowhere"); }) == ErrorKind::not_found);
}

TEST_CASE("split_url", "[ingest]")
{
    const auto p = net::split_url("https://api.example.com/v1/x?y=1");
    CHECK(p.scheme_host_port == "https://api.example.com");
    CHECK(p.path_and_query == "/v1/x?y=1");
    CHECK(kind_of([] { net::split_url("ftp://x"); }) == ErrorKind::config);
    CHECK(net::url_encode("a b&c") == "a%20b%26c");
}
