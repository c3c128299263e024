#pragma once

#include "meteo/agents.hpp"
#include "meteo/chart.hpp"
#include "meteo/diagnostics.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace meteo::report {

struct ReportMetadata {
    Timestamp generated_at = 0; // injected, never read from the system clock here
    std::string location;
    int utc_offset_seconds = 0;
    diagnostics::TimeWindow forecast_window;
    int horizon_hours = 0;
    int baseline_years = 20;
    std::string provider_id;

    bool operator==(const ReportMetadata&) const = default;
};

struct WarningEntry {
    std::optional<diagnostics::HazardKind> kind; // nullopt for unclassified agent text
    std::optional<diagnostics::HazardSeverity> severity;
    diagnostics::TimeWindow time_range;
    std::string text;                      // hazard rationale, or the agent's warning
    std::vector<std::string> agent_notes;  // agent warnings merged into a hazard
    std::string climatology_comparison;    // empty when no matching anomaly
    bool from_diagnostics = false;

    bool operator==(const WarningEntry&) const = default;
};

struct ReportDocument {
    std::string title;
    std::string synopsis;          // writer introduction
    std::string forecast_summary;  // meteorologist summary
    std::string reasoning;         // meteorologist explanation
    agents::Confidence confidence;
    std::vector<agents::WeatherParam> weather_params;
    std::vector<chart::RenderedChart> charts;
    std::vector<WarningEntry> warnings; // empty means no warnings section
    ReportMetadata metadata;

    bool operator==(const ReportDocument&) const = default;
};

// Keyword classification of free-text agent warnings, e.g. "gusts" ->
// high_wind. Returns nullopt when nothing matches.
std::optional<diagnostics::HazardKind> classify_warning(std::string_view text);

// One sentence comparing the anomaly with its normal. Percentiles are
// labelled as resting on a normal-distribution assumption.
std::string climatology_sentence(const diagnostics::AnomalyReport& anomaly, int baseline_years);

// Diagnostic hazards come first in their given order; each agent warning
// either merges into an entry of the same kind with an overlapping range or
// becomes its own entry spanning the forecast window.
ReportDocument compile_report(const agents::WriterOutput& writer, const agents::MeteorologistOutput& met,
                              std::vector<chart::RenderedChart> charts,
                              std::span<const diagnostics::HazardWarning> hazards,
                              std::span<const diagnostics::AnomalyReport> anomalies, ReportMetadata meta);

// Chart i (0-based) is referenced as charts/chart_{i+1}.svg.
std::string chart_file_name(std::size_t index);

std::string emit_markdown(const ReportDocument& doc);
// Self-contained XHTML-compatible document with inline SVG and styles.
std::string emit_html(const ReportDocument& doc);

} // namespace meteo::report
