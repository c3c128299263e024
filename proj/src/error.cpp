#include "meteo/error.hpp"

namespace meteo {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::network: return "network";
    case ErrorKind::http_status: return "http_status";
    case ErrorKind::authentication: return "authentication";
    case ErrorKind::schema: return "schema";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::gap: return "gap";
    case ErrorKind::incomplete: return "incomplete";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::unknown_parameter: return "unknown_parameter";
    case ErrorKind::missing_month: return "missing_month";
    case ErrorKind::validation: return "validation";
    case ErrorKind::retries_exhausted: return "retries_exhausted";
    case ErrorKind::provider: return "provider";
    case ErrorKind::output: return "output";
    }
    return "unknown";
}

} // namespace meteo
