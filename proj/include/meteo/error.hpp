#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meteo {

// Classification carried by every error the library throws. The CLI maps
// these onto exit codes; tests assert on them instead of message text.
enum class ErrorKind {
    config,            // invalid configuration or flag
    precondition,      // caller violated an operation precondition
    network,           // transport failure (connect, TLS, timeout)
    http_status,       // non-2xx response from a provider
    authentication,    // 401/403 from a provider
    schema,            // payload does not have the expected shape
    invariant,         // payload parsed but violates a domain invariant
    gap,               // hourly coverage has a hole
    incomplete,        // fewer than the required entries (e.g. 11 months)
    not_found,         // missing file
    invalid_input,     // path exists but is not usable (e.g. a directory)
    unknown_parameter, // parameter name not in the supported set
    missing_month,     // climatology lacks a month the series spans
    validation,        // agent output failed schema validation
    retries_exhausted, // agent repair retries used up
    provider,          // LLM provider returned an error or empty completion
    output,            // failure writing report artifacts
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace meteo
