#pragma once

#include "meteo/diagnostics.hpp"
#include "meteo/domain.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meteo::context {

struct InfoSection {
    std::string name;       // LOCATION, FORECAST TABLE, CLIMATOLOGY INFO, DIAGNOSTICS
    std::string source_tag; // nominatim, openweather, meteostat, diagnostics
    std::string payload;    // newline-terminated lines

    bool operator==(const InfoSection&) const = default;
};

struct ExternalInfoBlock {
    std::string rendered_text;
    std::vector<InfoSection> sections;
    int token_estimate = 0;
    bool over_budget = false;

    bool operator==(const ExternalInfoBlock&) const = default;
};

struct ContextOptions {
    int token_budget = 8000;
};

// Ceil(code points / 4).
int estimate_tokens(std::string_view text);

// Section layout:
//   == NAME ==\n
//   source: tag\n
//   payload
// with one blank line between sections.
std::string render_sections(std::span<const InfoSection> sections);

ExternalInfoBlock build_external_info(const ForecastSeries& series, const ClimatologyNormals& normals,
                                      const GeoContext& geo, std::span<const diagnostics::FrontEvent> fronts,
                                      std::span<const diagnostics::AnomalyReport> anomalies,
                                      std::span<const diagnostics::HazardWarning> hazards,
                                      const ContextOptions& options = {});

// Individual sections, also used by the CLI `diagnose` summary.
std::string forecast_table(const ForecastSeries& series);
std::string diagnostics_lines(std::span<const diagnostics::FrontEvent> fronts,
                              std::span<const diagnostics::AnomalyReport> anomalies,
                              std::span<const diagnostics::HazardWarning> hazards);

// Fixed-point text with negative zero printed as zero.
std::string fixed(double value, int decimals);

} // namespace meteo::context
