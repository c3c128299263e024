#include "meteo/pipeline.hpp"

#include "meteo/chart.hpp"
#include "meteo/report.hpp"
#include "meteo/text.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace meteo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value)
{
    const auto v = trim(value);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw Error(ErrorKind::config, fmt::format("{}: '{}' is not a valid number", key, v));
    return out;
}

bool parse_bool(std::string_view key, std::string_view value)
{
    const auto v = trim(value);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw Error(ErrorKind::config, fmt::format("{}: '{}' is not a boolean", key, v));
}

ingest::SourceMode parse_mode(std::string_view key, std::string_view value)
{
    if (value == "live")
        return ingest::SourceMode::live;
    if (value == "fixture")
        return ingest::SourceMode::fixture;
    throw Error(ErrorKind::config, fmt::format("{}: expected live or fixture, got '{}'", key, value));
}

Timestamp parse_clock(std::string_view value)
{
    if (const auto t = parse_iso_utc(value))
        return *t;
    try {
        return parse_number<Timestamp>("clock", value);
    } catch (const Error&) {
        throw Error(ErrorKind::config,
                    fmt::format("clock: '{}' is neither epoch seconds nor YYYY-MM-DDTHH:MMZ", value));
    }
}

void write_file(const fs::path& path, std::string_view content)
{
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
        throw Error(ErrorKind::output, fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f)
        throw Error(ErrorKind::output, fmt::format("cannot write {}", path.string()));
}

ingest::DataSourceConfig source_config(const PipelineConfig& cfg, ingest::SourceMode mode, const char* fixture,
                                       const std::string& endpoint, const std::string& key)
{
    ingest::DataSourceConfig src;
    src.mode = mode;
    src.endpoint = endpoint;
    src.api_key = key;
    if (mode == ingest::SourceMode::fixture)
        src.fixture = cfg.fixture_dir / fixture;
    src.units = cfg.units;
    src.retries = cfg.fetch_retries;
    src.horizon_hours = cfg.horizon_hours;
    src.normals_start_year = cfg.normals_start_year;
    src.normals_end_year = cfg.normals_end_year;
    return src;
}

fs::path mock_dir_of(const PipelineConfig& cfg)
{
    return cfg.mock_dir.empty() ? cfg.fixture_dir / "mock" : cfg.mock_dir;
}

// Runs `fn`, tagging any failure with the stage's exit code and category.
template <typename Fn>
auto stage(ExitCode code, const char* category, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(code, category, e.kind(), e.what());
    } catch (const std::exception& e) {
        throw StageError(code, category, ErrorKind::invariant, e.what());
    }
}

} // namespace

std::optional<std::string> process_env(const char* name)
{
    if (const char* v = std::getenv(name); v && *v)
        return std::string(v);
    return std::nullopt;
}

void apply_setting(PipelineConfig& cfg, std::string_view key_in, std::string_view value_in)
{
    const auto key = trim(key_in);
    const auto value = trim(value_in);
    const auto num = [&]<typename T>(T& field) { field = parse_number<T>(key, value); };

    if (key == "location") cfg.location = value;
    else if (key == "horizon_hours") num(cfg.horizon_hours);
    else if (key == "forecast_source") cfg.forecast_mode = parse_mode(key, value);
    else if (key == "climatology_source") cfg.climatology_mode = parse_mode(key, value);
    else if (key == "geo_source") cfg.geo_mode = parse_mode(key, value);
    else if (key == "fixture_dir") cfg.fixture_dir = value;
    else if (key == "units") cfg.units = ingest::parse_unit_system(value);
    else if (key == "openweather_endpoint") cfg.openweather_endpoint = value;
    else if (key == "meteostat_endpoint") cfg.meteostat_endpoint = value;
    else if (key == "nominatim_endpoint") cfg.nominatim_endpoint = value;
    else if (key == "normals_start_year") num(cfg.normals_start_year);
    else if (key == "normals_end_year") num(cfg.normals_end_year);
    else if (key == "fetch_retries") num(cfg.fetch_retries);
    else if (key == "provider") {
        if (value == "live")
            cfg.provider = ProviderMode::live;
        else if (value == "mock")
            cfg.provider = ProviderMode::mock;
        else
            throw Error(ErrorKind::config, fmt::format("provider: expected live or mock, got '{}'", value));
    }
    else if (key == "llm_base_url") cfg.llm.base_url = value;
    else if (key == "model") cfg.llm.model = value;
    else if (key == "mock_dir") cfg.mock_dir = value;
    else if (key == "front.window_hours") num(cfg.fronts.window_hours);
    else if (key == "front.tendency_hours") num(cfg.fronts.tendency_hours);
    else if (key == "front.pressure_fall") num(cfg.fronts.pressure_fall);
    else if (key == "front.veer") num(cfg.fronts.veer);
    else if (key == "front.temperature_drop") num(cfg.fronts.temperature_drop);
    else if (key == "front.drop_interval_hours") num(cfg.fronts.drop_interval_hours);
    else if (key == "anomaly.z_moderate") num(cfg.bands.z_moderate);
    else if (key == "anomaly.z_high") num(cfg.bands.z_high);
    else if (key == "anomaly.temp_dev_moderate") num(cfg.bands.temp_dev_moderate);
    else if (key == "anomaly.temp_dev_high") num(cfg.bands.temp_dev_high);
    else if (key == "anomaly.precip_ratio_moderate") num(cfg.bands.precip_ratio_moderate);
    else if (key == "anomaly.precip_ratio_high") num(cfg.bands.precip_ratio_high);
    else if (key == "hazard.heavy_precipitation") num(cfg.hazards.heavy_precipitation);
    else if (key == "hazard.flood_window_hours") num(cfg.hazards.flood_window_hours);
    else if (key == "hazard.flood_sum") num(cfg.hazards.flood_sum);
    else if (key == "hazard.high_wind") num(cfg.hazards.high_wind);
    else if (key == "hazard.high_gust") num(cfg.hazards.high_gust);
    else if (key == "hazard.heat_offset") num(cfg.hazards.heat_offset);
    else if (key == "hazard.cold_offset") num(cfg.hazards.cold_offset);
    else if (key == "hazard.low_visibility") num(cfg.hazards.low_visibility);
    else if (key == "token_budget") num(cfg.context.token_budget);
    else if (key == "max_retries") num(cfg.prompts.max_retries);
    else if (key == "max_output_tokens") num(cfg.prompts.max_output_tokens);
    else if (key == "meteorologist_temperature") num(cfg.prompts.meteorologist_temperature);
    else if (key == "writer_temperature") num(cfg.prompts.writer_temperature);
    else if (key == "illustrator_temperature") num(cfg.prompts.illustrator_temperature);
    else if (key == "tone") cfg.prefs.tone = value;
    else if (key == "audience") cfg.prefs.audience = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "pdf_command") cfg.pdf_command = value;
    else if (key == "debug_prompts") cfg.debug_prompts = parse_bool(key, value);
    else if (key == "clock") cfg.clock = parse_clock(value);
    else throw Error(ErrorKind::config, fmt::format("unknown setting '{}'", key));
}

void load_config_file(PipelineConfig& cfg, const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::config, fmt::format("cannot read config file {}", path.string()));
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config, fmt::format("{}:{}: expected key = value", path.string(), number));
        try {
            apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorKind::config, fmt::format("{}:{}: {}", path.string(), number, e.what()));
        }
    }
}

void apply_environment(PipelineConfig& cfg, const EnvLookup& env)
{
    if (auto v = env("OPENWEATHER_API_KEY"))
        cfg.openweather_key = *v;
    if (auto v = env("METEOSTAT_API_KEY"))
        cfg.meteostat_key = *v;
    if (auto v = env("LLM_API_KEY"))
        cfg.llm.api_key = *v;
    if (auto v = env("METEO_FIXTURE_DIR"))
        cfg.fixture_dir = *v;
}

void make_offline(PipelineConfig& cfg)
{
    cfg.forecast_mode = ingest::SourceMode::fixture;
    cfg.climatology_mode = ingest::SourceMode::fixture;
    cfg.geo_mode = ingest::SourceMode::fixture;
    cfg.provider = ProviderMode::mock;
}

void validate_config(const PipelineConfig& cfg, bool needs_llm)
{
    if (cfg.horizon_hours < 1 || cfg.horizon_hours > static_cast<int>(ForecastSeries::kMaxSamples))
        throw Error(ErrorKind::config, fmt::format("horizon {} h outside [1, 120]", cfg.horizon_hours));
    if (trim(cfg.location).empty())
        throw Error(ErrorKind::config, "no location given (use --location or the `location` setting)");
    const bool any_fixture = cfg.forecast_mode == ingest::SourceMode::fixture ||
                             cfg.climatology_mode == ingest::SourceMode::fixture ||
                             cfg.geo_mode == ingest::SourceMode::fixture;
    if (any_fixture && cfg.fixture_dir.empty())
        throw Error(ErrorKind::config, "fixture mode needs a fixture directory (fixture_dir or METEO_FIXTURE_DIR)");
    if (cfg.forecast_mode == ingest::SourceMode::live && cfg.openweather_key.empty())
        throw Error(ErrorKind::config, "live forecasts need OPENWEATHER_API_KEY");
    if (needs_llm && cfg.provider == ProviderMode::live && cfg.llm.api_key.empty())
        throw Error(ErrorKind::config, "the live LLM provider needs LLM_API_KEY");
    if (cfg.normals_end_year < cfg.normals_start_year)
        throw Error(ErrorKind::config, "normals_end_year precedes normals_start_year");
    if (cfg.prompts.max_retries < 0)
        throw Error(ErrorKind::config, "max_retries must be >= 0");
    if (cfg.context.token_budget < 1)
        throw Error(ErrorKind::config, "token_budget must be positive");
    if (cfg.output_dir.empty())
        throw Error(ErrorKind::config, "output directory is empty");
    agents::tone_directive(cfg.prefs.tone);
    if (trim(cfg.prefs.audience).empty())
        throw Error(ErrorKind::config, "audience must be non-empty");
}

std::optional<LocationRef> parse_coordinates(std::string_view text)
{
    std::string name;
    std::string_view coords = text;
    if (const auto at = text.rfind('@'); at != std::string_view::npos) {
        name = trim(text.substr(0, at));
        coords = text.substr(at + 1);
    }
    const auto comma = coords.find(',');
    if (comma == std::string_view::npos)
        return std::nullopt;
    double lat = 0;
    double lon = 0;
    try {
        lat = parse_number<double>("location", coords.substr(0, comma));
        lon = parse_number<double>("location", coords.substr(comma + 1));
    } catch (const Error&) {
        if (!name.empty())
            throw Error(ErrorKind::config, fmt::format("location '{}': expected Name@lat,lon", text));
        return std::nullopt;
    }
    if (name.empty())
        name = fmt::format("{}, {}", context::fixed(lat, 4), context::fixed(lon, 4));
    LocationRef loc{name, lat, lon, 0};
    validate_location(loc);
    return loc;
}

std::size_t Findings::count() const
{
    std::size_t n = fronts.size() + hazards.size();
    for (const auto& a : anomalies)
        if (a.severity != diagnostics::AnomalySeverity::none)
            ++n;
    return n;
}

LocationRef resolve_location(const PipelineConfig& cfg, net::HttpClient& http)
{
    if (auto loc = parse_coordinates(cfg.location))
        return *loc;
    auto src = source_config(cfg, cfg.geo_mode, "geocode.json", cfg.nominatim_endpoint, "");
    try {
        return ingest::geocode(trim(cfg.location), src, http);
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("geocoding: {}", e.what()));
    }
}

Inputs fetch_inputs(const PipelineConfig& cfg, const LocationRef& location, net::HttpClient& http)
{
    const auto fc = source_config(cfg, cfg.forecast_mode, "forecast.json", cfg.openweather_endpoint, cfg.openweather_key);
    const auto cl =
        source_config(cfg, cfg.climatology_mode, "climatology.json", cfg.meteostat_endpoint, cfg.meteostat_key);
    const auto geo = source_config(cfg, cfg.geo_mode, "geo.json", cfg.nominatim_endpoint, "");

    std::string raw_fc, raw_cl, raw_geo;
    auto f1 = std::async(std::launch::async, [&] { return ingest::fetch_forecast(location, fc, http, &raw_fc); });
    auto f2 = std::async(std::launch::async, [&] { return ingest::fetch_climatology(location, cl, http, &raw_cl); });
    auto f3 = std::async(std::launch::async, [&] { return ingest::fetch_geo_context(location, geo, http, &raw_geo); });

    const auto named = [](const char* source, auto& fut) {
        try {
            return fut.get();
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("{}: {}", source, e.what()));
        }
    };
    // Wait for all three before reporting, so no task outlives the buffers.
    f1.wait();
    f2.wait();
    f3.wait();
    auto series = named("forecast", f1);
    auto normals = named("climatology", f2);
    auto geo_ctx = named("geo", f3);
    return Inputs{std::move(series), std::move(normals), std::move(geo_ctx), std::move(raw_fc), std::move(raw_cl),
                  std::move(raw_geo)};
}

Findings run_diagnostics(const Inputs& in, const PipelineConfig& cfg)
{
    Findings f;
    if (in.series.size() >= 12)
        f.fronts = diagnostics::detect_fronts(in.series, cfg.fronts);
    else
        f.notes.push_back(fmt::format("front detection skipped: {} h series is shorter than 12 h", in.series.size()));
    for (const auto p : {diagnostics::AnomalyParameter::temperature, diagnostics::AnomalyParameter::precipitation})
        f.anomalies.push_back(diagnostics::anomaly_score(in.series, in.normals, p, cfg.bands));
    f.hazards = diagnostics::detect_hazards(in.series, f.anomalies, cfg.hazards);
    return f;
}

json findings_json(const Inputs& in, const Findings& f)
{
    json fronts = json::array();
    for (const auto& e : f.fronts)
        fronts.push_back({{"kind", to_string(e.kind)},
                          {"onset", iso_utc(e.onset)},
                          {"window", {iso_utc(e.window.start), iso_utc(e.window.end)}},
                          {"pressure_tendency_min", e.pressure_tendency_min},
                          {"wind_veer_total", e.wind_veer_total},
                          {"temp_drop", e.temp_drop},
                          {"evidence_score", e.evidence_score}});
    json anomalies = json::array();
    for (const auto& a : f.anomalies) {
        json j = {{"parameter", to_string(a.parameter)},
                  {"forecast_aggregate", a.forecast_aggregate},
                  {"baseline_mean", a.baseline_mean},
                  {"deviation", a.deviation},
                  {"z_score", nullptr},
                  {"percentile", nullptr},
                  {"severity", to_string(a.severity)}};
        if (a.z_score)
            j["z_score"] = *a.z_score;
        if (a.percentile)
            j["percentile"] = *a.percentile;
        anomalies.push_back(std::move(j));
    }
    json hazards = json::array();
    for (const auto& h : f.hazards) {
        json triggers = json::array();
        for (const auto& t : h.triggering_values)
            triggers.push_back({{"time", iso_utc(t.timestamp)}, {"parameter", t.parameter}, {"value", t.value}});
        hazards.push_back({{"kind", to_string(h.kind)},
                           {"severity", to_string(h.severity)},
                           {"time_range", {iso_utc(h.time_range.start), iso_utc(h.time_range.end)}},
                           {"rationale", h.rationale},
                           {"triggering_values", std::move(triggers)}});
    }
    const auto& loc = in.series.location();
    return {{"location",
             {{"name", loc.name}, {"latitude", loc.latitude}, {"longitude", loc.longitude},
              {"utc_offset_seconds", loc.utc_offset_seconds}}},
            {"window", {iso_utc(in.series.start()), iso_utc(in.series.end())}},
            {"samples", in.series.size()},
            {"fronts", std::move(fronts)},
            {"anomalies", std::move(anomalies)},
            {"hazards", std::move(hazards)},
            {"notes", f.notes}};
}

namespace {

json location_json(const LocationRef& loc)
{
    return {{"name", loc.name}, {"latitude", loc.latitude}, {"longitude", loc.longitude}};
}

int cmd_fetch(const PipelineConfig& cfg, std::ostream& out, net::HttpClient& http)
{
    const auto location = stage(ExitCode::ingest, "ingest", [&] { return resolve_location(cfg, http); });
    const auto in = stage(ExitCode::ingest, "ingest", [&] { return fetch_inputs(cfg, location, http); });

    const json summary = {
        {"location", location_json(location)},
        {"sources",
         json::array({
             {{"source", "forecast"},
              {"status", "ok"},
              {"samples", in.series.size()},
              {"window", {iso_utc(in.series.start()), iso_utc(in.series.end())}},
              {"utc_offset_seconds", in.series.location().utc_offset_seconds}},
             {{"source", "climatology"}, {"status", "ok"}, {"months", 12}, {"baseline_years", in.normals.baseline_years()}},
             {{"source", "geo"},
              {"status", "ok"},
              {"place_name", in.geo.place_name},
              {"region", to_string(in.geo.region_kind)},
              {"terrain", to_string(in.geo.terrain_kind)}},
         })},
    };
    stage(ExitCode::output, "output", [&] {
        const auto raw = cfg.output_dir / "raw";
        write_file(raw / "forecast.json", in.raw_forecast);
        write_file(raw / "climatology.json", in.raw_climatology);
        write_file(raw / "geo.json", in.raw_geo);
        write_file(raw / "location.json", location_json(location).dump(2) + "\n");
        write_file(cfg.output_dir / "fetch_summary.json", summary.dump(2) + "\n");
        return 0;
    });
    out << fmt::format("forecast: OK ({} hourly samples, {} .. {})\n", in.series.size(), iso_utc(in.series.start()),
                       iso_utc(in.series.end()));
    out << fmt::format("climatology: OK (12 monthly normals, {}-year baseline)\n", in.normals.baseline_years());
    out << fmt::format("geo: OK ({}, {}, {})\n", in.geo.place_name, to_string(in.geo.region_kind),
                       to_string(in.geo.terrain_kind));
    out << fmt::format("raw payloads written to {}\n", (cfg.output_dir / "raw").string());
    return 0;
}

// Diagnose works on fixtures or on the payloads saved by a previous fetch.
Inputs load_saved_inputs(const PipelineConfig& cfg, net::HttpClient& http)
{
    const bool all_fixture = cfg.forecast_mode == ingest::SourceMode::fixture &&
                             cfg.climatology_mode == ingest::SourceMode::fixture &&
                             cfg.geo_mode == ingest::SourceMode::fixture;
    if (all_fixture)
        return fetch_inputs(cfg, resolve_location(cfg, http), http);

    const auto raw = cfg.output_dir / "raw";
    for (const char* f : {"forecast.json", "climatology.json", "geo.json", "location.json"})
        if (!fs::exists(raw / f))
            throw Error(ErrorKind::not_found,
                        fmt::format("no fetched data at {} (missing {}); run `meteo fetch` with the same --out first, "
                                    "or use --offline with a fixture directory",
                                    raw.string(), f));
    PipelineConfig saved = cfg;
    saved.fixture_dir = raw;
    make_offline(saved);
    const auto loc_json = json::parse(ingest::load_fixture(raw / "location.json"));
    LocationRef location{loc_json.at("name").get<std::string>(), loc_json.at("latitude").get<double>(),
                         loc_json.at("longitude").get<double>(), 0};
    return fetch_inputs(saved, location, http);
}

int cmd_diagnose(const PipelineConfig& cfg, std::ostream& out, net::HttpClient& http)
{
    const auto in = stage(ExitCode::ingest, "ingest", [&] { return load_saved_inputs(cfg, http); });
    const auto f = stage(ExitCode::ingest, "diagnostics", [&] { return run_diagnostics(in, cfg); });
    stage(ExitCode::output, "output", [&] {
        write_file(cfg.output_dir / "findings.json", findings_json(in, f).dump(2) + "\n");
        return 0;
    });
    for (const auto& n : f.notes)
        out << "note: " << n << '\n';
    if (f.count() == 0) {
        out << "no findings\n";
        return 0;
    }
    std::vector<diagnostics::AnomalyReport> notable;
    for (const auto& a : f.anomalies)
        if (a.severity != diagnostics::AnomalySeverity::none)
            notable.push_back(a);
    out << fmt::format("{} cold_front, {} anomal{}, {} hazard{}\n", f.fronts.size(), notable.size(),
                       notable.size() == 1 ? "y" : "ies", f.hazards.size(), f.hazards.size() == 1 ? "" : "s");
    out << context::diagnostics_lines(f.fronts, notable, f.hazards);
    return 0;
}

std::unique_ptr<agents::ChatProvider> make_provider(const PipelineConfig& cfg, net::HttpClient& http)
{
    if (cfg.provider == ProviderMode::mock) {
        const auto dir = mock_dir_of(cfg);
        if (!fs::is_directory(dir))
            throw Error(ErrorKind::config, fmt::format("mock provider needs a script directory; {} not found",
                                                       dir.string()));
        return agents::MockProvider::load(dir);
    }
    return std::make_unique<agents::OpenAiCompatibleProvider>(cfg.llm, http);
}

std::string dump_exchange(const agents::Exchange& x)
{
    std::string s = fmt::format("agent: {}\nattempt: {}\ntemperature: {}\n\n=== SYSTEM ===\n{}\n\n=== USER ===\n{}\n", x.agent,
                                x.attempt, x.request.temperature, x.request.system_prompt, x.request.user_prompt);
    s += fmt::format("\n=== RESPONSE ===\n{}\n", x.response.text);
    if (x.validation_error)
        s += fmt::format("\n=== VALIDATION ERROR ===\n{}\n", *x.validation_error);
    return s;
}

int cmd_report(const PipelineConfig& cfg, std::ostream& out, net::HttpClient& http)
{
    auto provider = stage(ExitCode::config, "config", [&] { return make_provider(cfg, http); });
    const auto location = stage(ExitCode::ingest, "ingest", [&] { return resolve_location(cfg, http); });
    const auto in = stage(ExitCode::ingest, "ingest", [&] { return fetch_inputs(cfg, location, http); });
    const auto f = stage(ExitCode::ingest, "diagnostics", [&] { return run_diagnostics(in, cfg); });
    const auto block = context::build_external_info(in.series, in.normals, in.geo, f.fronts, f.anomalies, f.hazards,
                                                    cfg.context);
    std::vector<std::string> notes = f.notes;
    if (block.over_budget)
        notes.push_back(fmt::format("external info is ~{} tokens, above the {} token budget", block.token_estimate,
                                    cfg.context.token_budget));

    agents::AgentTrace trace;
    const auto dump_prompts = [&] {
        if (!cfg.debug_prompts)
            return;
        for (std::size_t i = 0; i < trace.exchanges.size(); ++i) {
            const auto& x = trace.exchanges[i];
            write_file(cfg.output_dir / "prompts" / fmt::format("{:02d}_{}_{}.txt", i + 1, x.agent, x.attempt),
                       dump_exchange(x));
        }
    };
    agents::MeteorologistOutput met;
    agents::WriterOutput writer;
    std::vector<ChartSpec> specs;
    try {
        met = stage(ExitCode::agent, "agent",
                    [&] { return agents::run_meteorologist(block, cfg.prompts, *provider, &trace).value; });
        writer = stage(ExitCode::agent, "agent",
                       [&] { return agents::run_writer(met, in.geo, cfg.prefs, cfg.prompts, *provider, &trace).value; });
        specs = stage(ExitCode::agent, "agent",
                      [&] { return agents::run_illustrator(in.series, met, cfg.prompts, *provider, &trace); });
    } catch (const StageError&) {
        try {
            dump_prompts();
        } catch (const Error&) {
        }
        throw;
    }
    notes.insert(notes.end(), trace.notes.begin(), trace.notes.end());

    stage(ExitCode::output, "output", [&] {
        std::vector<chart::RenderedChart> charts;
        for (const auto& s : specs)
            charts.push_back(chart::render_chart(s, in.series));

        report::ReportMetadata meta;
        meta.generated_at = cfg.clock ? *cfg.clock
                                      : std::chrono::duration_cast<std::chrono::seconds>(
                                            std::chrono::system_clock::now().time_since_epoch())
                                            .count();
        meta.location = in.geo.place_name.empty() ? location.name : in.geo.place_name;
        meta.utc_offset_seconds = in.series.location().utc_offset_seconds;
        meta.forecast_window = {in.series.start(), in.series.end()};
        meta.horizon_hours = in.series.horizon_hours();
        meta.baseline_years = in.normals.baseline_years();
        meta.provider_id = provider->id();
        const auto doc = report::compile_report(writer, met, std::move(charts), f.hazards, f.anomalies, meta);

        for (std::size_t i = 0; i < doc.charts.size(); ++i)
            write_file(cfg.output_dir / "charts" / report::chart_file_name(i), doc.charts[i].svg_text);
        write_file(cfg.output_dir / "report.md", report::emit_markdown(doc));
        write_file(cfg.output_dir / "report.html", report::emit_html(doc));
        dump_prompts();

        if (!cfg.pdf_command.empty()) {
            std::string cmd = cfg.pdf_command;
            const auto html = (cfg.output_dir / "report.html").string();
            const auto pdf = (cfg.output_dir / "report.pdf").string();
            for (auto [ph, val] : {std::pair{std::string("{html}"), html}, std::pair{std::string("{pdf}"), pdf}})
                for (auto p = cmd.find(ph); p != std::string::npos; p = cmd.find(ph, p + val.size()))
                    cmd.replace(p, ph.size(), val);
            if (const int rc = std::system(cmd.c_str()); rc != 0)
                throw Error(ErrorKind::output, fmt::format("pdf_command exited with status {}", rc));
        }
        out << fmt::format("wrote {} ({} chart{})\n", (cfg.output_dir / "report.html").string(), doc.charts.size(),
                           doc.charts.size() == 1 ? "" : "s");
        return 0;
    });
    for (const auto& n : notes)
        out << "note: " << n << '\n';
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, net::HttpClient& http,
        const EnvLookup& env)
{
    CLI::App app{"Weather report pipeline: fetch, diagnose, report", "meteo"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> location;
    std::optional<int> horizon;
    std::optional<std::string> out_dir;
    std::optional<std::string> fixture_dir;
    std::optional<std::string> clock;
    std::vector<std::string> prefs;
    bool offline = false;
    bool debug_prompts = false;

    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--location", location, "\"lat,lon\", \"Name@lat,lon\" or a place name");
    app.add_option("--horizon", horizon, "forecast hours, 1..120 (default 48)");
    app.add_flag("--offline", offline, "fixtures for every source and the mock LLM provider");
    app.add_option("--out", out_dir, "output directory (default out)");
    app.add_option("--fixture-dir", fixture_dir, "fixture directory (forecast.json, climatology.json, geo.json, mock/)");
    app.add_option("--prefs", prefs, "user preference k=v (tone, audience)");
    app.add_flag("--debug-prompts", debug_prompts, "write every assembled prompt to <out>/prompts");
    app.add_option("--clock", clock, "report generation time (epoch seconds or YYYY-MM-DDTHH:MMZ)");

    auto* fetch = app.add_subcommand("fetch", "fetch all three sources and save the raw payloads");
    auto* diagnose = app.add_subcommand("diagnose", "run front, anomaly and hazard diagnostics");
    auto* report_cmd = app.add_subcommand("report", "run the full pipeline and write the report bundle");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error[config]: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    }

    try {
        PipelineConfig cfg;
        stage(ExitCode::config, "config", [&] {
            if (!config_path.empty())
                load_config_file(cfg, config_path);
            apply_environment(cfg, env);
            if (offline)
                make_offline(cfg);
            if (location)
                cfg.location = *location;
            if (horizon)
                cfg.horizon_hours = *horizon;
            if (out_dir)
                cfg.output_dir = *out_dir;
            if (fixture_dir)
                cfg.fixture_dir = *fixture_dir;
            if (clock)
                cfg.clock = parse_clock(*clock);
            if (debug_prompts)
                cfg.debug_prompts = true;
            for (const auto& p : prefs) {
                const auto eq = p.find('=');
                const auto key = trim(p.substr(0, eq));
                if (eq == std::string::npos || (key != "tone" && key != "audience"))
                    throw Error(ErrorKind::config, fmt::format("--prefs '{}': expected tone=... or audience=...", p));
                apply_setting(cfg, key, p.substr(eq + 1));
            }
            validate_config(cfg, report_cmd->parsed());
            return 0;
        });

        if (fetch->parsed())
            return cmd_fetch(cfg, out, http);
        if (diagnose->parsed())
            return cmd_diagnose(cfg, out, http);
        if (report_cmd->parsed())
            return cmd_report(cfg, out, http);
        err << "error[config]: no command given\n";
        return static_cast<int>(ExitCode::config);
    } catch (const StageError& e) {
        err << fmt::format("error[{}]: {}\n", e.category(), e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        err << fmt::format("error[output]: {}\n", e.what());
        return static_cast<int>(ExitCode::output);
    }
}

} // namespace meteo::cli
