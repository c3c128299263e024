#pragma once

#include "meteo/chart_spec.hpp"
#include "meteo/context.hpp"
#include "meteo/domain.hpp"
#include "meteo/error.hpp"
#include "meteo/net.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace meteo::agents {

// ---------------------------------------------------------------------------
// Chat transport

enum class ResponseFormat { free_text, json_object };

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.2; // [0, 2]
    int max_output_tokens = 1500;
    ResponseFormat response_format = ResponseFormat::free_text;

    bool operator==(const ChatRequest&) const = default;
};

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;

    bool operator==(const Usage&) const = default;
};

struct ChatResponse {
    std::string text;
    std::string finish_reason; // "stop", "length", ... or "unmatched" from the mock
    Usage usage;

    bool operator==(const ChatResponse&) const = default;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    // "openai-compatible:gpt-4o", "mock"
    virtual std::string id() const = 0;
};

struct LiveProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key;
};

// OpenAI-compatible `POST {base_url}/chat/completions`.
class OpenAiCompatibleProvider final : public ChatProvider {
public:
    OpenAiCompatibleProvider(LiveProviderConfig config, net::HttpClient& http = net::default_client());

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override;

private:
    LiveProviderConfig config_;
    net::HttpClient& http_;
};

// Deterministic offline provider. Responses are looked up by a stable hash:
//   1. exact key  = prompt_key(system, user)
//   2. system key = system_key(system), for scripted multi-turn sequences
//      where repair prompts are not known up front
// Each key owns a response sequence consumed one entry per call; the last
// entry repeats once the sequence is exhausted. Anything else gets an
// `unmatched` fallback response.
class MockProvider final : public ChatProvider {
public:
    enum class Scope { exact, system };

    static std::string prompt_key(std::string_view system_prompt, std::string_view user_prompt);
    static std::string system_key(std::string_view system_prompt);

    // Loads every *.json file of the form
    //   {"key": "<16 hex>", "scope": "exact"|"system", "responses": ["...", ...]}
    // Throws ErrorKind::config on malformed files or duplicate keys and
    // ErrorKind::not_found for a missing directory.
    static std::unique_ptr<MockProvider> load(const std::filesystem::path& dir);

    void script(Scope scope, const std::string& key, std::vector<std::string> responses);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "mock"; }

    // Number of complete() calls served so far.
    std::size_t calls() const;

private:
    struct Sequence {
        std::vector<std::string> responses;
        std::size_t cursor = 0;
    };

    mutable std::mutex mutex_;
    std::map<std::string, Sequence> exact_;
    std::map<std::string, Sequence> system_;
    std::size_t calls_ = 0;
};

// Checks request invariants, then calls the provider. Throws
// ErrorKind::precondition for bad requests and ErrorKind::provider for an
// empty completion.
ChatResponse chat_complete(const ChatRequest& request, ChatProvider& provider);

// ---------------------------------------------------------------------------
// Structured outputs

enum class ConfidenceLabel { low, medium, high };

std::string_view to_string(ConfidenceLabel l) noexcept;
// low < 0.4 <= medium < 0.7 <= high
ConfidenceLabel confidence_band(double score) noexcept;

struct Confidence {
    ConfidenceLabel label = ConfidenceLabel::medium;
    double score = 0.5;

    bool operator==(const Confidence&) const = default;
};

struct MeteorologistOutput {
    std::string summary;
    std::string explanation;
    Confidence confidence;
    std::vector<std::string> warnings;

    bool operator==(const MeteorologistOutput&) const = default;
};

struct WeatherParam {
    Parameter parameter = Parameter::temperature;
    std::string description;

    bool operator==(const WeatherParam&) const = default;
};

struct WriterOutput {
    std::string title;
    std::string introduction;
    std::vector<WeatherParam> weather_params;

    bool operator==(const WriterOutput&) const = default;
};

enum class OutputSchema { meteorologist, writer, illustrator };

std::string_view to_string(OutputSchema s) noexcept;

enum class ValidationErrorKind { unparseable, missing_key, type_mismatch, bound_violation, cross_field };

std::string_view to_string(ValidationErrorKind k) noexcept;

class ValidationError : public Error {
public:
    ValidationError(ValidationErrorKind kind, std::string field, const std::string& detail);

    ValidationErrorKind validation_kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ValidationErrorKind kind_;
    std::string field_;
};

// Strips prose and ``` fences around the payload, parses the first JSON
// object (meteorologist, writer) or array (illustrator), and checks keys,
// types, bounds and cross-field rules in a fixed order. Throws
// ValidationError naming the first violated rule. For the illustrator only
// the array shape is checked here; elements are checked by parse_chart_spec.
nlohmann::json validate_agent_output(std::string_view raw, OutputSchema schema);

// Returns the first balanced JSON object/array text in `raw`, if any.
std::optional<std::string> extract_json(std::string_view raw);

MeteorologistOutput to_meteorologist_output(const nlohmann::json& validated);
WriterOutput to_writer_output(const nlohmann::json& validated);
// Throws ValidationError for elements that do not describe a valid spec for
// this series.
ChartSpec parse_chart_spec(const nlohmann::json& element, const ForecastSeries& series);

// ---------------------------------------------------------------------------
// Prompt assembly

struct PromptConfig {
    double meteorologist_temperature = 0.2;
    double writer_temperature = 0.2;
    double illustrator_temperature = 0.0;
    int max_output_tokens = 1500;
    int max_retries = 2; // repair retries after the first attempt

    bool operator==(const PromptConfig&) const = default;
};

struct UserPrefs {
    std::string tone = "neutral";
    std::string audience = "general public";

    bool operator==(const UserPrefs&) const = default;
};

// Known tones: neutral, technical, public, brief. Throws ErrorKind::config.
std::string_view tone_directive(std::string_view tone);

std::string meteorologist_system_prompt();
std::string meteorologist_user_prompt(const context::ExternalInfoBlock& block);
std::string writer_system_prompt();
std::string writer_user_prompt(const MeteorologistOutput& met, const GeoContext& geo, const UserPrefs& prefs);
std::string illustrator_system_prompt();
std::string illustrator_user_prompt(const ForecastSeries& series, const MeteorologistOutput& met);
std::string repair_prompt(std::string_view original_user_prompt, std::string_view previous_response,
                          std::string_view validation_error);

// Raw shipped template text by file stem, e.g. "meteorologist.v1".
std::string_view prompt_template(std::string_view name);

// ---------------------------------------------------------------------------
// Agent runs

struct Exchange {
    std::string agent;
    int attempt = 0; // 0 = first try, 1.. = repair retries
    ChatRequest request;
    ChatResponse response;
    std::optional<std::string> validation_error;
};

struct AgentTrace {
    std::vector<Exchange> exchanges;
    std::vector<std::string> notes; // non-fatal issues, e.g. dropped chart specs
};

template <typename T>
struct AgentResult {
    T value;
    int retry_count = 0;
};

class AgentError : public Error {
public:
    AgentError(ErrorKind kind, std::string agent, std::string last_validation_error, const std::string& message)
        : Error(kind, message), agent_(std::move(agent)), last_validation_error_(std::move(last_validation_error)) {}

    const std::string& agent() const noexcept { return agent_; }
    const std::string& last_validation_error() const noexcept { return last_validation_error_; }

private:
    std::string agent_;
    std::string last_validation_error_;
};

// Validate-and-repair loop: up to 1 + cfg.max_retries calls; each retry sends
// repair_prompt() quoting the previous validation error verbatim. Throws
// AgentError(retries_exhausted) carrying the last validation error, or
// propagates provider errors.
AgentResult<MeteorologistOutput> run_meteorologist(const context::ExternalInfoBlock& block, const PromptConfig& cfg,
                                                   ChatProvider& provider, AgentTrace* trace = nullptr);
AgentResult<WriterOutput> run_writer(const MeteorologistOutput& met, const GeoContext& geo, const UserPrefs& prefs,
                                     const PromptConfig& cfg, ChatProvider& provider, AgentTrace* trace = nullptr);

// Single call. Invalid specs are dropped with a note in `trace`; an empty
// result falls back to default_chart_specs(). At most 4 specs are kept.
// Only provider errors propagate.
std::vector<ChartSpec> run_illustrator(const ForecastSeries& series, const MeteorologistOutput& met,
                                       const PromptConfig& cfg, ChatProvider& provider, AgentTrace* trace = nullptr);

} // namespace meteo::agents
