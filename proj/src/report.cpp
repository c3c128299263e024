#include "meteo/report.hpp"

#include "meteo/context.hpp"
#include "meteo/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace meteo::report {

using diagnostics::AnomalyParameter;
using diagnostics::AnomalyReport;
using diagnostics::HazardKind;
using diagnostics::TimeWindow;
using context::fixed;

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_any(const std::string& haystack, std::initializer_list<std::string_view> needles)
{
    return std::any_of(needles.begin(), needles.end(),
                       [&](std::string_view n) { return haystack.find(n) != std::string::npos; });
}

bool overlaps(const TimeWindow& a, const TimeWindow& b)
{
    return a.start <= b.end && b.start <= a.end;
}

std::optional<AnomalyParameter> anomaly_parameter_for(HazardKind k)
{
    switch (k) {
    case HazardKind::flooding_risk:
    case HazardKind::heavy_precipitation: return AnomalyParameter::precipitation;
    case HazardKind::heat:
    case HazardKind::cold: return AnomalyParameter::temperature;
    default: return std::nullopt;
    }
}

std::string ordinal(long n)
{
    const long tens = n % 100;
    const char* suffix = "th";
    if (tens < 11 || tens > 13) {
        switch (n % 10) {
        case 1: suffix = "st"; break;
        case 2: suffix = "nd"; break;
        case 3: suffix = "rd"; break;
        default: break;
        }
    }
    return fmt::format("{}{}", n, suffix);
}

std::string hazard_title(std::optional<HazardKind> k)
{
    if (!k)
        return "Forecaster note";
    switch (*k) {
    case HazardKind::flooding_risk: return "Flooding risk";
    case HazardKind::heavy_precipitation: return "Heavy precipitation";
    case HazardKind::high_wind: return "High wind";
    case HazardKind::heat: return "Heat";
    case HazardKind::cold: return "Cold";
    case HazardKind::low_visibility: return "Low visibility";
    }
    return "Warning";
}

std::string range_text(const TimeWindow& w)
{
    if (w.start == w.end)
        return iso_utc(w.start);
    return fmt::format("{} to {}", iso_utc(w.start), iso_utc(w.end));
}

std::string entry_heading(const WarningEntry& e)
{
    std::string head = hazard_title(e.kind);
    if (e.severity)
        head += fmt::format(" ({}, {})", to_string(*e.severity), range_text(e.time_range));
    else
        head += fmt::format(" ({})", range_text(e.time_range));
    return head;
}

std::string entry_body(const WarningEntry& e)
{
    std::string body = e.text;
    for (const auto& note : e.agent_notes)
        body += fmt::format(" Forecaster note: {}", note);
    if (!e.climatology_comparison.empty())
        body += " " + e.climatology_comparison;
    return body;
}

std::string param_label(const agents::WeatherParam& p)
{
    const auto unit = parameter_unit(p.parameter);
    return unit.empty() ? std::string(parameter_name(p.parameter))
                        : fmt::format("{} ({})", parameter_name(p.parameter), unit);
}

std::string confidence_text(const agents::Confidence& c)
{
    return fmt::format("{} ({})", to_string(c.label), fixed(c.score, 2));
}

std::string metadata_line(const ReportMetadata& m)
{
    return fmt::format("{} | {} to {} (UTC{}, {} h) | generated {} | {}", m.location, iso_utc(m.forecast_window.start),
                       iso_utc(m.forecast_window.end), utc_offset_label(m.utc_offset_seconds), m.horizon_hours,
                       iso_utc(m.generated_at), m.provider_id);
}

std::vector<std::string> paragraphs(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (!current.empty())
                out.push_back(std::move(current));
            current.clear();
        } else {
            if (!current.empty())
                current += ' ';
            current += line;
        }
        if (nl == std::string_view::npos)
            break;
        pos = nl + 1;
    }
    if (!current.empty())
        out.push_back(std::move(current));
    return out;
}

std::string md_cell(std::string_view s)
{
    std::string out;
    for (const char c : s) {
        if (c == '|')
            out += "\\|";
        else if (c == '\n' || c == '\r')
            out += ' ';
        else
            out += c;
    }
    return out;
}

} // namespace

std::optional<HazardKind> classify_warning(std::string_view text)
{
    auto t = lower(text);
    if (contains_any(t, {"flood"}))
        return HazardKind::flooding_risk;
    if (contains_any(t, {"heavy rain", "heavy precip", "downpour", "torrential", "heavy shower"}))
        return HazardKind::heavy_precipitation;
    if (contains_any(t, {"gust", "gale", "wind", "storm"}))
        return HazardKind::high_wind;
    if (contains_any(t, {"fog", "visibility", "mist"}))
        return HazardKind::low_visibility;
    if (contains_any(t, {"heat", "hot"}))
        return HazardKind::heat;
    for (std::size_t p = t.find("cold front"); p != std::string::npos; p = t.find("cold front"))
        t.replace(p, 10, "front");
    if (contains_any(t, {"cold", "frost", "freez"}))
        return HazardKind::cold;
    return std::nullopt;
}

std::string climatology_sentence(const AnomalyReport& a, int baseline_years)
{
    if (a.parameter == AnomalyParameter::temperature) {
        std::string s = fmt::format(
            "Climatology: the forecast mean temperature of {} °C is {} °C {} the {}-year normal of {} °C",
            fixed(a.forecast_aggregate, 1), fixed(std::abs(a.deviation), 1), a.deviation >= 0 ? "above" : "below",
            baseline_years, fixed(a.baseline_mean, 1));
        if (a.z_score && a.percentile) {
            s += fmt::format(" (z = {}, about the {} percentile assuming normally distributed monthly temperatures).",
                             fixed(*a.z_score, 2), ordinal(std::lround(std::clamp(*a.percentile, 0.0, 100.0))));
        } else {
            s += " (no dispersion data, so no percentile is given).";
        }
        return s;
    }
    std::string s = fmt::format(
        "Climatology: forecast precipitation scaled to a monthly rate is {} mm against the {}-year normal of {} mm",
        fixed(a.forecast_aggregate, 1), baseline_years, fixed(a.baseline_mean, 1));
    if (a.baseline_mean > 0.0)
        s += fmt::format(" ({} times normal).", fixed(a.forecast_aggregate / a.baseline_mean, 1));
    else
        s += " (the normal is zero).";
    return s;
}

ReportDocument compile_report(const agents::WriterOutput& writer, const agents::MeteorologistOutput& met,
                              std::vector<chart::RenderedChart> charts,
                              std::span<const diagnostics::HazardWarning> hazards,
                              std::span<const AnomalyReport> anomalies, ReportMetadata meta)
{
    ReportDocument doc;
    doc.title = writer.title;
    doc.synopsis = writer.introduction;
    doc.forecast_summary = met.summary;
    doc.reasoning = met.explanation;
    doc.confidence = met.confidence;
    doc.weather_params = writer.weather_params;
    doc.charts = std::move(charts);

    for (const auto& h : hazards) {
        const bool duplicate = std::any_of(doc.warnings.begin(), doc.warnings.end(), [&](const WarningEntry& e) {
            return e.kind == h.kind && overlaps(e.time_range, h.time_range);
        });
        if (duplicate)
            continue;
        WarningEntry e;
        e.kind = h.kind;
        e.severity = h.severity;
        e.time_range = h.time_range;
        e.text = h.rationale;
        e.from_diagnostics = true;
        doc.warnings.push_back(std::move(e));
    }
    for (const auto& text : met.warnings) {
        const auto kind = classify_warning(text);
        auto match = doc.warnings.end();
        if (kind)
            match = std::find_if(doc.warnings.begin(), doc.warnings.end(), [&](const WarningEntry& e) {
                return e.kind == kind && overlaps(e.time_range, meta.forecast_window);
            });
        if (match != doc.warnings.end()) {
            match->agent_notes.push_back(text);
            continue;
        }
        WarningEntry e;
        e.kind = kind;
        e.time_range = meta.forecast_window;
        e.text = text;
        doc.warnings.push_back(std::move(e));
    }
    for (auto& e : doc.warnings) {
        if (!e.kind)
            continue;
        const auto param = anomaly_parameter_for(*e.kind);
        if (!param)
            continue;
        for (const auto& a : anomalies)
            if (a.parameter == *param) {
                e.climatology_comparison = climatology_sentence(a, meta.baseline_years);
                break;
            }
    }
    doc.metadata = std::move(meta);
    return doc;
}

std::string chart_file_name(std::size_t index)
{
    return fmt::format("chart_{}.svg", index + 1);
}

std::string emit_markdown(const ReportDocument& doc)
{
    std::string md;
    md += fmt::format("# {}\n\n", doc.title);
    md += fmt::format("_{}_\n\n", metadata_line(doc.metadata));

    md += "## Synopsis\n\n";
    for (const auto& p : paragraphs(doc.synopsis))
        md += p + "\n\n";

    md += "## Forecast summary\n\n";
    for (const auto& p : paragraphs(doc.forecast_summary))
        md += p + "\n\n";
    md += "### Reasoning\n\n";
    for (const auto& p : paragraphs(doc.reasoning))
        md += p + "\n\n";
    md += fmt::format("**Confidence:** {}\n\n", confidence_text(doc.confidence));
    md += "### Weather parameters\n\n";
    md += "| Parameter | Description |\n|---|---|\n";
    for (const auto& p : doc.weather_params)
        md += fmt::format("| {} | {} |\n", md_cell(param_label(p)), md_cell(p.description));
    md += '\n';

    if (!doc.charts.empty()) {
        md += "## Charts\n\n";
        for (std::size_t i = 0; i < doc.charts.size(); ++i)
            md += fmt::format("![{}](charts/{})\n\n", doc.charts[i].spec.title, chart_file_name(i));
    }

    if (!doc.warnings.empty()) {
        md += "## Warnings\n\n";
        for (const auto& e : doc.warnings)
            md += fmt::format("- **{}**: {}\n", entry_heading(e), entry_body(e));
        md += '\n';
    }
    while (md.size() > 1 && md[md.size() - 1] == '\n' && md[md.size() - 2] == '\n')
        md.pop_back();
    return md;
}

std::string emit_html(const ReportDocument& doc)
{
    const auto esc = [](std::string_view s) { return xml_escape(s); };
    std::string h;
    h += "<!DOCTYPE html>\n";
    h += "<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n";
    h += fmt::format("<title>{}</title>\n", esc(doc.title));
    h += "<style>\n"
         "body { font-family: Helvetica, Arial, sans-serif; max-width: 860px; margin: 2em auto; color: #222222; }\n"
         "h1 { font-size: 1.6em; margin-bottom: 0.2em; }\n"
         ".meta { color: #666666; font-size: 0.9em; }\n"
         "table.weather-params { border-collapse: collapse; width: 100%; }\n"
         "table.weather-params th, table.weather-params td { border: 1px solid #cccccc; padding: 4px 8px; "
         "text-align: left; vertical-align: top; }\n"
         "figure { margin: 1em 0; }\n"
         "figcaption { color: #555555; font-size: 0.9em; }\n"
         "ul.warnings li { margin-bottom: 0.6em; }\n"
         "</style>\n</head>\n<body>\n";

    h += fmt::format("<header>\n<h1>{}</h1>\n<p class=\"meta\">{}</p>\n</header>\n", esc(doc.title),
                     esc(metadata_line(doc.metadata)));

    h += "<section id=\"synopsis\">\n<h2>Synopsis</h2>\n";
    for (const auto& p : paragraphs(doc.synopsis))
        h += fmt::format("<p>{}</p>\n", esc(p));
    h += "</section>\n";

    h += "<section id=\"summary\">\n<h2>Forecast summary</h2>\n";
    for (const auto& p : paragraphs(doc.forecast_summary))
        h += fmt::format("<p class=\"summary\">{}</p>\n", esc(p));
    h += "<h3>Reasoning</h3>\n";
    for (const auto& p : paragraphs(doc.reasoning))
        h += fmt::format("<p class=\"reasoning\">{}</p>\n", esc(p));
    h += fmt::format("<p class=\"confidence\"><strong>Confidence:</strong> {}</p>\n", esc(confidence_text(doc.confidence)));
    h += "<h3>Weather parameters</h3>\n<table class=\"weather-params\">\n"
         "<tr><th>Parameter</th><th>Description</th></tr>\n";
    for (const auto& p : doc.weather_params)
        h += fmt::format("<tr><td>{}</td><td>{}</td></tr>\n", esc(param_label(p)), esc(p.description));
    h += "</table>\n</section>\n";

    if (!doc.charts.empty()) {
        h += "<section id=\"charts\">\n<h2>Charts</h2>\n";
        for (const auto& c : doc.charts) {
            h += "<figure>\n";
            h += chart::inline_svg(c);
            h += fmt::format("<figcaption>{}</figcaption>\n</figure>\n", esc(c.spec.title));
        }
        h += "</section>\n";
    }

    if (!doc.warnings.empty()) {
        h += "<section id=\"warnings\">\n<h2>Warnings</h2>\n<ul class=\"warnings\">\n";
        for (const auto& e : doc.warnings)
            h += fmt::format("<li><strong>{}</strong>: {}</li>\n", esc(entry_heading(e)), esc(entry_body(e)));
        h += "</ul>\n</section>\n";
    }
    h += "</body>\n</html>\n";
    return h;
}

} // namespace meteo::report
