#pragma once

#include "meteo/diagnostics.hpp"
#include "meteo/domain.hpp"
#include "meteo/ingest.hpp"
#include "meteo/net.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

fs::path source_dir();
fs::path data_dir();    // tests/data
fs::path fixture_dir(); // tests/data/fixtures
fs::path golden_dir();  // tests/golden

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

// Compares `actual` with a golden file. With METEO_UPDATE_GOLDEN=1 in the
// environment the golden file is rewritten instead. Returns an empty string on
// success, otherwise a short description of the first difference.
std::string check_golden(const fs::path& golden, const std::string& actual);

// Fresh empty directory under the system temp dir.
fs::path temp_dir(const std::string& tag);

// Fails every request, counting attempts. Offline code paths must leave
// calls() at zero.
class RefusingHttpClient final : public meteo::net::HttpClient {
public:
    meteo::net::HttpResponse get(const std::string& url, const meteo::net::Headers&) override;
    meteo::net::HttpResponse post(const std::string& url, const std::string&, const std::string&,
                                  const meteo::net::Headers&) override;
    int calls() const { return calls_.load(); }

private:
    std::atomic<int> calls_{0};
};

// Returns canned responses in order and records requests.
class ScriptedHttpClient final : public meteo::net::HttpClient {
public:
    struct Request {
        std::string method;
        std::string url;
        std::string body;
        meteo::net::Headers headers;
    };

    explicit ScriptedHttpClient(std::vector<meteo::net::HttpResponse> responses) : responses_(std::move(responses)) {}

    meteo::net::HttpResponse get(const std::string& url, const meteo::net::Headers& headers) override;
    meteo::net::HttpResponse post(const std::string& url, const std::string& body, const std::string&,
                                  const meteo::net::Headers& headers) override;

    std::vector<Request> requests;

private:
    meteo::net::HttpResponse next();
    std::vector<meteo::net::HttpResponse> responses_;
    std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Synthetic data

meteo::HourlySample calm_sample(meteo::Timestamp t);

// Hourly series starting at `start` built from per-field vectors; missing
// vectors fall back to calm values.
struct SeriesSpec {
    meteo::Timestamp start = 1751220000; // 2025-06-29T18:00Z
    int utc_offset_seconds = 0;
    std::size_t hours = 48;
    std::vector<double> pressure;
    std::vector<double> wind_dir;
    std::vector<double> temperature;
    std::vector<double> precipitation;
    std::vector<double> wind_speed;
    std::vector<double> visibility;
};

meteo::ForecastSeries make_series(const SeriesSpec& spec);

meteo::ClimatologyNormals uniform_normals(double mean_temperature, std::optional<double> std,
                                          double precipitation);

struct FrontInjection {
    std::size_t index = 0; // sample index of the injected tendency minimum
};

// Random background series that cannot fire on its own. When `inject` is
// set, a cold-front signature meeting all three default thresholds is placed
// with its strongest pressure fall at `inject->index`. `decoy` adds one or two
// of the signals without the third (used for negatives).
meteo::ForecastSeries random_front_series(std::mt19937_64& rng, std::size_t hours,
                                          std::optional<FrontInjection> inject, bool decoy);

meteo::ForecastSeries random_series(std::mt19937_64& rng, std::size_t hours, bool with_gusts);

// OneCall-shaped payload for `series`, with values converted out of the
// internal units into `units` (the inverse of ingest::to_metric).
std::string onecall_payload(const meteo::ForecastSeries& series, meteo::ingest::UnitSystem units);

// Runs one case of tests/data/ingest/manifest.json. Returns an empty string
// when the parsed object matches the expected file field by field, or the
// expected error kind is raised.
std::string run_ingest_case(const nlohmann::json& manifest, const nlohmann::json& entry);

// What the chart tests need back out of a rendered SVG.
struct ParsedChart {
    double y_min = 0.0;
    double y_max = 0.0;
    double plot_top = 0.0;
    double plot_bottom = 0.0;
    double plot_left = 0.0;
    std::vector<std::string> parameters;                         // per polyline
    std::vector<std::vector<std::pair<double, double>>> points; // per polyline
    std::vector<std::string> y_ticks;                            // label text, bottom to top
};

ParsedChart parse_chart_svg(const std::string& svg);

// Inverse of the chart's value-to-pixel mapping.
double value_at(const ParsedChart& chart, double y);

// ---------------------------------------------------------------------------
// Independent oracles

// Signed rotation via atan2 of the rotated unit vector, mapped so exact
// opposites give +180.
double oracle_circular_diff(double from, double to);

// Direct path sum of oracle_circular_diff over the samples of [start, end].
double oracle_path_sum(const meteo::ForecastSeries& s, meteo::Timestamp start, meteo::Timestamp end);

// Brute-force front detection: evaluates every window from scratch, with no
// shared state between windows, then merges firing windows pairwise until
// no two share a sample.
std::vector<meteo::diagnostics::FrontEvent> oracle_detect_fronts(const meteo::ForecastSeries& s,
                                                                 const meteo::diagnostics::FrontDetectionParams& p);

// Same events: kind, onset and window exactly, the sums within 1e-9 since
// the two sides add rotations in a different order.
bool same_fronts(const std::vector<meteo::diagnostics::FrontEvent>& a,
                 const std::vector<meteo::diagnostics::FrontEvent>& b);

// Local-calendar month of a timestamp via gmtime_r.
std::pair<int, int> oracle_year_month(meteo::Timestamp t, int utc_offset_seconds);

// Hour-weighted normal temperature by direct summation over samples.
double oracle_blended_temperature(const meteo::ForecastSeries& s, const meteo::ClimatologyNormals& n);

// All rolling-window sums of hourly precipitation: sums[i] covers samples
// [i, i + w).
std::vector<double> oracle_rolling_sums(const meteo::ForecastSeries& s, int w);

// Minimal well-formedness check: balanced tags, single root, quoted
// attributes. Returns an empty string when the document is well-formed.
std::string xml_problem(const std::string& text);

// Counts non-overlapping occurrences.
std::size_t count_of(const std::string& haystack, const std::string& needle);

} // namespace testing
