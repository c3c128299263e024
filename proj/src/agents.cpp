#include "meteo/agents.hpp"

#include "meteo/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace meteo::agents {

using nlohmann::json;

namespace detail {
// Generated from prompts/*.txt at build time.
std::string_view embedded_prompt(std::string_view name);
} // namespace detail

// ---------------------------------------------------------------------------
// Transport

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool is_blank(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string provider_message(const std::string& body)
{
    try {
        const auto j = json::parse(body);
        if (j.contains("error") && j["error"].is_object() && j["error"].contains("message") &&
            j["error"]["message"].is_string())
            return j["error"]["message"].get<std::string>();
    } catch (const json::exception&) {
    }
    return body.substr(0, 200);
}

} // namespace

OpenAiCompatibleProvider::OpenAiCompatibleProvider(LiveProviderConfig config, net::HttpClient& http)
    : config_(std::move(config)), http_(http)
{
    while (!config_.base_url.empty() && config_.base_url.back() == '/')
        config_.base_url.pop_back();
}

std::string OpenAiCompatibleProvider::id() const
{
    return "openai-compatible:" + config_.model;
}

ChatResponse OpenAiCompatibleProvider::complete(const ChatRequest& request)
{
    json body = {
        {"model", config_.model},
        {"messages",
         json::array({{{"role", "system"}, {"content", request.system_prompt}},
                      {{"role", "user"}, {"content", request.user_prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    if (request.response_format == ResponseFormat::json_object)
        body["response_format"] = {{"type", "json_object"}};

    const auto res = http_.post(config_.base_url + "/chat/completions", body.dump(), "application/json",
                                {{"Authorization", "Bearer " + config_.api_key}});
    if (res.status == 401 || res.status == 403)
        throw Error(ErrorKind::authentication, fmt::format("LLM provider rejected credentials (HTTP {}): {}",
                                                           res.status, provider_message(res.body)));
    if (res.status < 200 || res.status >= 300)
        throw Error(ErrorKind::provider,
                    fmt::format("LLM provider returned HTTP {}: {}", res.status, provider_message(res.body)));

    json parsed;
    try {
        parsed = json::parse(res.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::provider, fmt::format("LLM provider returned invalid JSON: {}", e.what()));
    }
    const auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array() || choices->empty())
        throw Error(ErrorKind::provider, "LLM provider response has no choices");
    const json& choice = choices->front();
    ChatResponse out;
    if (choice.contains("message") && choice["message"].is_object() && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
        out.text = choice["message"]["content"].get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
        out.finish_reason = choice["finish_reason"].get<std::string>();
    if (const auto usage = parsed.find("usage"); usage != parsed.end() && usage->is_object()) {
        out.usage.prompt_tokens = usage->value("prompt_tokens", 0);
        out.usage.completion_tokens = usage->value("completion_tokens", 0);
    }
    return out;
}

std::string MockProvider::prompt_key(std::string_view system_prompt, std::string_view user_prompt)
{
    std::uint64_t h = fnv1a(system_prompt);
    h = fnv1a("\x1e", h);
    h = fnv1a(user_prompt, h);
    return fmt::format("{:016x}", h);
}

std::string MockProvider::system_key(std::string_view system_prompt)
{
    return fmt::format("{:016x}", fnv1a(system_prompt, fnv1a("system\x1e")));
}

std::unique_ptr<MockProvider> MockProvider::load(const std::filesystem::path& dir)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw Error(ErrorKind::not_found, fmt::format("mock script directory not found: {}", dir.string()));

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    auto mock = std::make_unique<MockProvider>();
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        json j;
        try {
            j = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::config, fmt::format("mock script {}: {}", file.string(), e.what()));
        }
        if (!j.is_object() || !j.contains("key") || !j["key"].is_string() || !j.contains("responses") ||
            !j["responses"].is_array() || j["responses"].empty())
            throw Error(ErrorKind::config,
                        fmt::format("mock script {}: expected {{\"key\", \"scope\", \"responses\"}}", file.string()));
        const auto scope_name = j.value("scope", std::string("exact"));
        if (scope_name != "exact" && scope_name != "system")
            throw Error(ErrorKind::config, fmt::format("mock script {}: unknown scope '{}'", file.string(), scope_name));
        std::vector<std::string> responses;
        for (const auto& r : j["responses"])
            responses.push_back(r.is_string() ? r.get<std::string>() : r.dump(2));
        const auto scope = scope_name == "exact" ? Scope::exact : Scope::system;
        const auto key = j["key"].get<std::string>();
        auto& table = scope == Scope::exact ? mock->exact_ : mock->system_;
        if (table.count(key))
            throw Error(ErrorKind::config, fmt::format("mock script {}: duplicate key {}", file.string(), key));
        mock->script(scope, key, std::move(responses));
    }
    return mock;
}

void MockProvider::script(Scope scope, const std::string& key, std::vector<std::string> responses)
{
    std::lock_guard lock(mutex_);
    auto& table = scope == Scope::exact ? exact_ : system_;
    table[key] = Sequence{std::move(responses), 0};
}

ChatResponse MockProvider::complete(const ChatRequest& request)
{
    std::lock_guard lock(mutex_);
    ++calls_;
    const auto usage = Usage{context::estimate_tokens(request.system_prompt) +
                                 context::estimate_tokens(request.user_prompt),
                             0};
    const auto serve = [&](Sequence& seq) {
        const auto& text = seq.responses[std::min(seq.cursor, seq.responses.size() - 1)];
        ++seq.cursor;
        return ChatResponse{text, "stop", Usage{usage.prompt_tokens, context::estimate_tokens(text)}};
    };
    const auto exact = prompt_key(request.system_prompt, request.user_prompt);
    if (auto it = exact_.find(exact); it != exact_.end())
        return serve(it->second);
    const auto system = system_key(request.system_prompt);
    if (auto it = system_.find(system); it != system_.end())
        return serve(it->second);
    const json fallback = {{"error", "unmatched"}, {"prompt_key", exact}, {"system_key", system}};
    return ChatResponse{fallback.dump(), "unmatched", usage};
}

std::size_t MockProvider::calls() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

ChatResponse chat_complete(const ChatRequest& request, ChatProvider& provider)
{
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0))
        throw Error(ErrorKind::precondition, fmt::format("temperature {} outside [0, 2]", request.temperature));
    if (is_blank(request.system_prompt) || is_blank(request.user_prompt))
        throw Error(ErrorKind::precondition, "system and user prompts must be non-empty");
    if (request.max_output_tokens < 1)
        throw Error(ErrorKind::precondition, "max_output_tokens must be positive");
    auto response = provider.complete(request);
    if (is_blank(response.text))
        throw Error(ErrorKind::provider, fmt::format("{} returned an empty completion", provider.id()));
    return response;
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ConfidenceLabel l) noexcept
{
    switch (l) {
    case ConfidenceLabel::low: return "low";
    case ConfidenceLabel::medium: return "medium";
    case ConfidenceLabel::high: return "high";
    }
    return "medium";
}

ConfidenceLabel confidence_band(double score) noexcept
{
    if (score < 0.4)
        return ConfidenceLabel::low;
    if (score < 0.7)
        return ConfidenceLabel::medium;
    return ConfidenceLabel::high;
}

std::string_view to_string(OutputSchema s) noexcept
{
    switch (s) {
    case OutputSchema::meteorologist: return "meteorologist";
    case OutputSchema::writer: return "writer";
    case OutputSchema::illustrator: return "illustrator";
    }
    return "";
}

std::string_view to_string(ValidationErrorKind k) noexcept
{
    switch (k) {
    case ValidationErrorKind::unparseable: return "unparseable";
    case ValidationErrorKind::missing_key: return "missing_key";
    case ValidationErrorKind::type_mismatch: return "type_mismatch";
    case ValidationErrorKind::bound_violation: return "bound_violation";
    case ValidationErrorKind::cross_field: return "cross_field";
    }
    return "";
}

ValidationError::ValidationError(ValidationErrorKind kind, std::string field, const std::string& detail)
    : Error(ErrorKind::validation, fmt::format("{} at '{}': {}", to_string(kind), field, detail)),
      kind_(kind), field_(std::move(field))
{
}

namespace {

std::optional<std::string> extract_balanced(std::string_view raw, std::size_t start)
{
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
        const char c = raw[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{' || c == '[')
            ++depth;
        else if (c == '}' || c == ']') {
            if (--depth == 0)
                return std::string(raw.substr(start, i - start + 1));
        }
    }
    return std::nullopt;
}

json parse_payload(std::string_view raw, char open)
{
    const auto start = raw.find(open);
    if (start == std::string_view::npos)
        throw ValidationError(ValidationErrorKind::unparseable, "$",
                              fmt::format("no JSON {} found in response", open == '{' ? "object" : "array"));
    const auto text = extract_balanced(raw, start);
    if (!text)
        throw ValidationError(ValidationErrorKind::unparseable, "$", "JSON value is truncated");
    try {
        return json::parse(*text);
    } catch (const json::parse_error& e) {
        throw ValidationError(ValidationErrorKind::unparseable, "$", e.what());
    }
}

void require_keys(const json& obj, std::initializer_list<const char*> keys)
{
    if (!obj.is_object())
        throw ValidationError(ValidationErrorKind::type_mismatch, "$", "expected a JSON object");
    for (const char* k : keys)
        if (!obj.contains(k))
            throw ValidationError(ValidationErrorKind::missing_key, k, "required key is absent");
}

const std::string& require_text(const json& obj, const std::string& path, const json& value)
{
    (void)obj;
    if (!value.is_string())
        throw ValidationError(ValidationErrorKind::type_mismatch, path,
                              fmt::format("expected string, got {}", value.type_name()));
    const auto& s = value.get_ref<const std::string&>();
    if (is_blank(s))
        throw ValidationError(ValidationErrorKind::bound_violation, path, "must be non-empty");
    return s;
}

void validate_meteorologist(const json& j)
{
    require_keys(j, {"summary", "explanation", "confidence_label", "confidence_score", "warnings"});
    require_text(j, "summary", j["summary"]);
    require_text(j, "explanation", j["explanation"]);
    const auto& label = require_text(j, "confidence_label", j["confidence_label"]);
    if (label != "low" && label != "medium" && label != "high")
        throw ValidationError(ValidationErrorKind::bound_violation, "confidence_label",
                              fmt::format("'{}' is not one of low, medium, high", label));
    const json& score = j["confidence_score"];
    if (!score.is_number())
        throw ValidationError(ValidationErrorKind::type_mismatch, "confidence_score",
                              fmt::format("expected number, got {}", score.type_name()));
    const double s = score.get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
        throw ValidationError(ValidationErrorKind::bound_violation, "confidence_score",
                              fmt::format("{} outside [0, 1]", score.dump()));
    const json& warnings = j["warnings"];
    if (!warnings.is_array())
        throw ValidationError(ValidationErrorKind::type_mismatch, "warnings",
                              fmt::format("expected array, got {}", warnings.type_name()));
    for (std::size_t i = 0; i < warnings.size(); ++i)
        require_text(j, fmt::format("warnings[{}]", i), warnings[i]);
    const auto band = confidence_band(s);
    if (to_string(band) != label)
        throw ValidationError(ValidationErrorKind::cross_field, "confidence_label",
                              fmt::format("'{}' inconsistent with confidence_score {} (expected '{}')", label,
                                          score.dump(), to_string(band)));
}

void validate_writer(const json& j)
{
    require_keys(j, {"title", "introduction", "weather_params"});
    require_text(j, "title", j["title"]);
    require_text(j, "introduction", j["introduction"]);
    const json& params = j["weather_params"];
    if (!params.is_array())
        throw ValidationError(ValidationErrorKind::type_mismatch, "weather_params",
                              fmt::format("expected array, got {}", params.type_name()));
    if (params.empty())
        throw ValidationError(ValidationErrorKind::bound_violation, "weather_params", "must list at least one parameter");
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto path = fmt::format("weather_params[{}]", i);
        const json& p = params[i];
        if (!p.is_object())
            throw ValidationError(ValidationErrorKind::type_mismatch, path,
                                  fmt::format("expected object, got {}", p.type_name()));
        for (const char* k : {"parameter", "description"})
            if (!p.contains(k))
                throw ValidationError(ValidationErrorKind::missing_key, path + "." + k, "required key is absent");
        const auto& name = require_text(p, path + ".parameter", p["parameter"]);
        require_text(p, path + ".description", p["description"]);
        if (!find_parameter(name))
            throw ValidationError(ValidationErrorKind::bound_violation, path + ".parameter",
                                  fmt::format("unknown parameter '{}'", name));
        if (std::find(seen.begin(), seen.end(), name) != seen.end())
            throw ValidationError(ValidationErrorKind::cross_field, path + ".parameter",
                                  fmt::format("parameter '{}' listed twice", name));
        seen.push_back(name);
    }
}

} // namespace

std::optional<std::string> extract_json(std::string_view raw)
{
    const auto start = raw.find_first_of("{[");
    if (start == std::string_view::npos)
        return std::nullopt;
    return extract_balanced(raw, start);
}

json validate_agent_output(std::string_view raw, OutputSchema schema)
{
    switch (schema) {
    case OutputSchema::meteorologist: {
        auto j = parse_payload(raw, '{');
        validate_meteorologist(j);
        return j;
    }
    case OutputSchema::writer: {
        auto j = parse_payload(raw, '{');
        validate_writer(j);
        return j;
    }
    case OutputSchema::illustrator: {
        auto j = parse_payload(raw, '[');
        if (!j.is_array())
            throw ValidationError(ValidationErrorKind::type_mismatch, "$", "expected a JSON array");
        return j;
    }
    }
    throw ValidationError(ValidationErrorKind::unparseable, "$", "unknown schema");
}

MeteorologistOutput to_meteorologist_output(const json& v)
{
    MeteorologistOutput out;
    out.summary = v["summary"].get<std::string>();
    out.explanation = v["explanation"].get<std::string>();
    out.confidence.score = v["confidence_score"].get<double>();
    out.confidence.label = confidence_band(out.confidence.score);
    for (const auto& w : v["warnings"])
        out.warnings.push_back(w.get<std::string>());
    return out;
}

WriterOutput to_writer_output(const json& v)
{
    WriterOutput out;
    out.title = v["title"].get<std::string>();
    out.introduction = v["introduction"].get<std::string>();
    for (const auto& p : v["weather_params"])
        out.weather_params.push_back(
            {parse_parameter(p["parameter"].get<std::string>()), p["description"].get<std::string>()});
    return out;
}

namespace {

Timestamp parse_range_endpoint(const json& v, const std::string& path)
{
    if (v.is_number_integer())
        return v.get<Timestamp>();
    if (v.is_string())
        if (const auto t = parse_iso_utc(v.get<std::string>()))
            return *t;
    throw ValidationError(ValidationErrorKind::type_mismatch, path,
                          "expected epoch seconds or a \"YYYY-MM-DDTHH:MMZ\" timestamp");
}

} // namespace

ChartSpec parse_chart_spec(const json& element, const ForecastSeries& series)
{
    require_keys(element, {"title", "parameters", "y_axis_label"});
    ChartSpec spec;
    if (element.contains("kind")) {
        const json& kind = element["kind"];
        if (!kind.is_string())
            throw ValidationError(ValidationErrorKind::type_mismatch, "kind", "expected string");
        if (kind.get<std::string>() != "line")
            throw ValidationError(ValidationErrorKind::bound_violation, "kind",
                                  fmt::format("unsupported chart kind '{}'", kind.get<std::string>()));
    }
    spec.title = require_text(element, "title", element["title"]);
    spec.y_axis_label = require_text(element, "y_axis_label", element["y_axis_label"]);
    const json& params = element["parameters"];
    if (!params.is_array())
        throw ValidationError(ValidationErrorKind::type_mismatch, "parameters", "expected array");
    if (params.empty() || params.size() > kMaxChartParameters)
        throw ValidationError(ValidationErrorKind::bound_violation, "parameters",
                              fmt::format("expected 1..{} entries, got {}", kMaxChartParameters, params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto path = fmt::format("parameters[{}]", i);
        const auto& name = require_text(element, path, params[i]);
        const auto p = find_parameter(name);
        if (!p)
            throw ValidationError(ValidationErrorKind::bound_violation, path, fmt::format("unknown parameter '{}'", name));
        spec.parameters.push_back(*p);
    }
    if (element.contains("highlight_ranges") && !element["highlight_ranges"].is_null()) {
        const json& ranges = element["highlight_ranges"];
        if (!ranges.is_array())
            throw ValidationError(ValidationErrorKind::type_mismatch, "highlight_ranges", "expected array");
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const auto path = fmt::format("highlight_ranges[{}]", i);
            if (!ranges[i].is_array() || ranges[i].size() != 2)
                throw ValidationError(ValidationErrorKind::type_mismatch, path, "expected [start, end]");
            spec.highlight_ranges.push_back(
                {parse_range_endpoint(ranges[i][0], path + "[0]"), parse_range_endpoint(ranges[i][1], path + "[1]")});
        }
    }
    try {
        validate_chart_spec(spec, series);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(ValidationErrorKind::cross_field, "$", e.what());
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Prompts

std::string_view prompt_template(std::string_view name)
{
    const auto text = detail::embedded_prompt(name);
    if (text.empty())
        throw Error(ErrorKind::config, fmt::format("no prompt template named '{}'", name));
    return text;
}

std::string_view tone_directive(std::string_view tone)
{
    if (tone == "neutral")
        return "Write in a neutral, factual register modelled on official national weather service bulletins.";
    if (tone == "technical")
        return "Use technical meteorological terminology (synoptic features, pressure tendency, veering and backing "
               "winds, dew point depression) and cite quantitative values with units, as in a forecast discussion "
               "written for other forecasters.";
    if (tone == "public")
        return "Write for the general public: plain language, short sentences, no jargon, and practical implications "
               "for outdoor activities and travel.";
    if (tone == "brief")
        return "Keep every text field as short as possible while preserving all warnings.";
    throw Error(ErrorKind::config, fmt::format("unknown tone '{}' (neutral|technical|public|brief)", tone));
}

namespace {

std::string bullet_list(const std::vector<std::string>& items)
{
    if (items.empty())
        return "none";
    std::string out;
    for (const auto& item : items) {
        if (!out.empty())
            out += '\n';
        out += "- " + item;
    }
    return out;
}

std::string parameter_names()
{
    std::string out;
    for (const auto p : kAllParameters) {
        if (!out.empty())
            out += ", ";
        out += parameter_name(p);
    }
    return out;
}

} // namespace

std::string meteorologist_system_prompt()
{
    return std::string(prompt_template("meteorologist.v1")) + "\n" +
           std::string(prompt_template("meteorologist_output.v1"));
}

std::string meteorologist_user_prompt(const context::ExternalInfoBlock& block)
{
    return render_template(prompt_template("meteorologist_user.v1"), {{"external_info", block.rendered_text}});
}

std::string writer_system_prompt()
{
    return render_template(prompt_template("writer.v1"), {{"parameter_names", parameter_names()}});
}

std::string writer_user_prompt(const MeteorologistOutput& met, const GeoContext& geo, const UserPrefs& prefs)
{
    const auto location = fmt::format("{} ({} area, {} terrain; {}, {})", geo.place_name, to_string(geo.region_kind),
                                      to_string(geo.terrain_kind), context::fixed(geo.latitude, 4),
                                      context::fixed(geo.longitude, 4));
    return render_template(prompt_template("writer_user.v1"),
                           {
                               {"location", location},
                               {"summary", met.summary},
                               {"explanation", met.explanation},
                               {"warnings", bullet_list(met.warnings)},
                               {"confidence", fmt::format("{} ({})", to_string(met.confidence.label),
                                                          context::fixed(met.confidence.score, 2))},
                               {"tone_directive", std::string(tone_directive(prefs.tone))},
                               {"audience", prefs.audience},
                           });
}

std::string illustrator_system_prompt()
{
    return std::string(prompt_template("illustrator.v1"));
}

std::string illustrator_user_prompt(const ForecastSeries& series, const MeteorologistOutput& met)
{
    std::string params;
    for (const auto p : kAllParameters) {
        if (!chartable(p))
            continue;
        double lo = HUGE_VAL;
        double hi = -HUGE_VAL;
        bool complete = true;
        for (const auto& s : series.samples()) {
            const auto v = parameter_value(s, p);
            if (!v) {
                complete = false;
                break;
            }
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
        }
        if (!complete)
            continue;
        const auto unit = parameter_unit(p);
        params += fmt::format("- {}{}: min {}, max {}\n", parameter_name(p),
                              unit.empty() ? std::string() : fmt::format(" ({})", unit), context::fixed(lo, 1),
                              context::fixed(hi, 1));
    }
    if (!params.empty())
        params.pop_back();
    const auto period =
        fmt::format("{} .. {} ({} hourly samples)", iso_utc(series.start()), iso_utc(series.end()), series.size());
    return render_template(prompt_template("illustrator_user.v1"), {{"period", period},
                                                                    {"parameters", params},
                                                                    {"summary", met.summary},
                                                                    {"warnings", bullet_list(met.warnings)}});
}

std::string repair_prompt(std::string_view original_user_prompt, std::string_view previous_response,
                          std::string_view validation_error)
{
    return render_template(prompt_template("repair.v1"), {{"original", std::string(original_user_prompt)},
                                                          {"error", std::string(validation_error)},
                                                          {"previous", std::string(previous_response)}});
}

// ---------------------------------------------------------------------------
// Runs

namespace {

template <typename T, typename Convert>
AgentResult<T> run_structured(const std::string& agent, const ChatRequest& base, OutputSchema schema,
                              Convert convert, const PromptConfig& cfg, ChatProvider& provider, AgentTrace* trace)
{
    const int attempts = 1 + std::max(0, cfg.max_retries);
    ChatRequest request = base;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        ChatResponse response;
        try {
            response = chat_complete(request, provider);
        } catch (const Error& e) {
            throw AgentError(e.kind(), agent, last_error, fmt::format("{}: {}", agent, e.what()));
        }
        try {
            const auto validated = validate_agent_output(response.text, schema);
            T value = convert(validated);
            if (trace)
                trace->exchanges.push_back({agent, attempt, request, response, std::nullopt});
            return AgentResult<T>{std::move(value), attempt};
        } catch (const ValidationError& e) {
            last_error = e.what();
            if (trace)
                trace->exchanges.push_back({agent, attempt, request, response, last_error});
            request.user_prompt = repair_prompt(base.user_prompt, response.text, last_error);
        }
    }
    throw AgentError(ErrorKind::retries_exhausted, agent, last_error,
                     fmt::format("{}: output still invalid after {} attempt(s): {}", agent, attempts, last_error));
}

} // namespace

AgentResult<MeteorologistOutput> run_meteorologist(const context::ExternalInfoBlock& block, const PromptConfig& cfg,
                                                   ChatProvider& provider, AgentTrace* trace)
{
    ChatRequest request{meteorologist_system_prompt(), meteorologist_user_prompt(block), cfg.meteorologist_temperature,
                        cfg.max_output_tokens, ResponseFormat::json_object};
    return run_structured<MeteorologistOutput>("meteorologist", request, OutputSchema::meteorologist,
                                               to_meteorologist_output, cfg, provider, trace);
}

AgentResult<WriterOutput> run_writer(const MeteorologistOutput& met, const GeoContext& geo, const UserPrefs& prefs,
                                     const PromptConfig& cfg, ChatProvider& provider, AgentTrace* trace)
{
    ChatRequest request{writer_system_prompt(), writer_user_prompt(met, geo, prefs), cfg.writer_temperature,
                        cfg.max_output_tokens, ResponseFormat::json_object};
    return run_structured<WriterOutput>("writer", request, OutputSchema::writer, to_writer_output, cfg, provider,
                                        trace);
}

std::vector<ChartSpec> run_illustrator(const ForecastSeries& series, const MeteorologistOutput& met,
                                       const PromptConfig& cfg, ChatProvider& provider, AgentTrace* trace)
{
    constexpr std::size_t kMaxCharts = 4;
    const ChatRequest request{illustrator_system_prompt(), illustrator_user_prompt(series, met),
                              cfg.illustrator_temperature, cfg.max_output_tokens, ResponseFormat::free_text};
    ChatResponse response;
    try {
        response = chat_complete(request, provider);
    } catch (const Error& e) {
        throw AgentError(e.kind(), "illustrator", "", fmt::format("illustrator: {}", e.what()));
    }
    const auto note = [&](std::string text) {
        if (trace)
            trace->notes.push_back(std::move(text));
    };

    std::vector<ChartSpec> specs;
    std::optional<std::string> rejected;
    try {
        const auto array = validate_agent_output(response.text, OutputSchema::illustrator);
        for (std::size_t i = 0; i < array.size(); ++i) {
            try {
                auto spec = parse_chart_spec(array[i], series);
                if (specs.size() == kMaxCharts) {
                    note(fmt::format("illustrator: dropped chart spec #{}: more than {} charts requested", i,
                                     kMaxCharts));
                    continue;
                }
                specs.push_back(std::move(spec));
            } catch (const ValidationError& e) {
                note(fmt::format("illustrator: dropped chart spec #{}: {}", i, e.what()));
            }
        }
    } catch (const ValidationError& e) {
        rejected = e.what();
        note(fmt::format("illustrator: response rejected: {}", e.what()));
    }
    if (trace)
        trace->exchanges.push_back({"illustrator", 0, request, response, rejected});
    if (specs.empty()) {
        note("illustrator: no valid chart specs; using the default temperature, wind and precipitation charts");
        specs = default_chart_specs();
    }
    return specs;
}

} // namespace meteo::agents
