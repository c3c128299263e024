#pragma once

#include "meteo/agents.hpp"
#include "meteo/context.hpp"
#include "meteo/diagnostics.hpp"
#include "meteo/ingest.hpp"
#include "meteo/net.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace meteo::cli {

enum class ProviderMode { live, mock };

struct PipelineConfig {
    std::string location;  // "lat,lon", "Name@lat,lon" or a place name to geocode
    int horizon_hours = 48;

    ingest::SourceMode forecast_mode = ingest::SourceMode::live;
    ingest::SourceMode climatology_mode = ingest::SourceMode::live;
    ingest::SourceMode geo_mode = ingest::SourceMode::live;
    std::filesystem::path fixture_dir;
    ingest::UnitSystem units = ingest::UnitSystem::metric;
    std::string openweather_endpoint;
    std::string meteostat_endpoint;
    std::string nominatim_endpoint;
    std::string openweather_key;
    std::string meteostat_key;
    int normals_start_year = 2004;
    int normals_end_year = 2023;
    int fetch_retries = 1;

    ProviderMode provider = ProviderMode::live;
    agents::LiveProviderConfig llm;
    std::filesystem::path mock_dir; // defaults to <fixture_dir>/mock

    diagnostics::FrontDetectionParams fronts;
    diagnostics::AnomalyBands bands;
    diagnostics::HazardParams hazards;
    context::ContextOptions context;
    agents::PromptConfig prompts;
    agents::UserPrefs prefs;

    std::filesystem::path output_dir = "out";
    std::string pdf_command; // "{html}" and "{pdf}" are substituted
    bool debug_prompts = false;
    std::optional<Timestamp> clock; // report generation time; now when unset
};

// Exit codes of the `meteo` binary.
enum class ExitCode { ok = 0, config = 1, ingest = 2, agent = 3, output = 4 };

// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(ExitCode code, std::string category, ErrorKind kind, const std::string& message)
        : Error(kind, message), code_(code), category_(std::move(category)) {}

    ExitCode code() const noexcept { return code_; }
    const std::string& category() const noexcept { return category_; }

private:
    ExitCode code_;
    std::string category_;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

// The process environment.
std::optional<std::string> process_env(const char* name);

// One `key = value` setting, as accepted in config files. Throws
// ErrorKind::config for unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

// Config file: one `key = value` per line, `#` starts a comment.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

// OPENWEATHER_API_KEY, METEOSTAT_API_KEY, LLM_API_KEY, METEO_FIXTURE_DIR.
void apply_environment(PipelineConfig& cfg, const EnvLookup& env);

// Sets every source to fixture mode and the provider to mock.
void make_offline(PipelineConfig& cfg);

// Throws ErrorKind::config. Performs no I/O. The LLM key is only checked
// when the command talks to the model.
void validate_config(const PipelineConfig& cfg, bool needs_llm = true);

// Parses "lat,lon" or "Name@lat,lon". Returns nullopt for a bare place name.
std::optional<LocationRef> parse_coordinates(std::string_view text);

struct Inputs {
    ForecastSeries series;
    ClimatologyNormals normals;
    GeoContext geo;
    std::string raw_forecast;
    std::string raw_climatology;
    std::string raw_geo;
};

struct Findings {
    std::vector<diagnostics::FrontEvent> fronts;
    std::vector<diagnostics::AnomalyReport> anomalies;
    std::vector<diagnostics::HazardWarning> hazards;
    std::vector<std::string> notes;

    // Fronts, hazards and anomalies with a severity above none.
    std::size_t count() const;
};

LocationRef resolve_location(const PipelineConfig& cfg, net::HttpClient& http);
// The three sources are fetched concurrently. Errors name the source.
Inputs fetch_inputs(const PipelineConfig& cfg, const LocationRef& location, net::HttpClient& http);
Findings run_diagnostics(const Inputs& in, const PipelineConfig& cfg);
nlohmann::json findings_json(const Inputs& in, const Findings& f);

// Entry point of the `meteo` binary. `args` excludes the program name.
// Returns the exit code; on failure exactly one `error[category]: ...` line
// is written to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        net::HttpClient& http = net::default_client(), const EnvLookup& env = process_env);

} // namespace meteo::cli
