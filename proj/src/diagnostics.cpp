#include "meteo/diagnostics.hpp"

#include "meteo/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace meteo::diagnostics {

double circular_diff(double from_deg, double to_deg)
{
    if (!std::isfinite(from_deg) || !std::isfinite(to_deg))
        throw Error(ErrorKind::precondition, "circular_diff: non-finite direction");
    double d = std::fmod(to_deg - from_deg, 360.0);
    if (d <= -180.0)
        d += 360.0;
    else if (d > 180.0)
        d -= 360.0;
    return d;
}

double accumulated_rotation(std::span<const double> directions_deg)
{
    double total = 0.0;
    for (std::size_t i = 1; i < directions_deg.size(); ++i)
        total += circular_diff(directions_deg[i - 1], directions_deg[i]);
    return total;
}

std::vector<std::optional<double>> pressure_tendency(const ForecastSeries& series, int window_h)
{
    if (window_h < 1)
        throw Error(ErrorKind::precondition, fmt::format("pressure_tendency: window {} h must be >= 1", window_h));
    if (series.size() <= static_cast<std::size_t>(window_h))
        throw Error(ErrorKind::precondition, fmt::format("pressure_tendency: series of {} samples is not longer than "
                                                         "the {} h window",
                                                         series.size(), window_h));
    const auto w = static_cast<std::size_t>(window_h);
    std::vector<std::optional<double>> out(series.size());
    for (std::size_t i = w; i < series.size(); ++i)
        out[i] = (series[i].pressure - series[i - w].pressure) / window_h;
    return out;
}

double wind_veer(const ForecastSeries& series, TimeWindow window)
{
    const auto first = series.index_of(window.start);
    const auto last = series.index_of(window.end);
    if (!first || !last)
        throw Error(ErrorKind::precondition,
                    fmt::format("wind_veer: window [{}, {}] not on the series grid [{}, {}]", iso_utc(window.start),
                                iso_utc(window.end), iso_utc(series.start()), iso_utc(series.end())));
    if (*last <= *first)
        throw Error(ErrorKind::precondition, "wind_veer: window must contain at least 2 samples");
    std::vector<double> dirs;
    for (std::size_t i = *first; i <= *last; ++i)
        dirs.push_back(series[i].wind_dir);
    return accumulated_rotation(dirs);
}

// ---------------------------------------------------------------------------

std::string_view to_string(FrontKind) noexcept
{
    return "cold_front";
}

namespace {

struct Extremum {
    double value = 0.0;
    std::size_t index = 0;
};

// Minimum defined tendency in [from, to], latest index on ties.
Extremum min_tendency(const std::vector<std::optional<double>>& tendency, std::size_t from, std::size_t to)
{
    Extremum best{std::numeric_limits<double>::infinity(), from};
    for (std::size_t i = from; i <= to; ++i) {
        if (tendency[i] && *tendency[i] <= best.value)
            best = {*tendency[i], i};
    }
    return best;
}

double max_drop(const ForecastSeries& series, std::size_t from, std::size_t to, std::size_t interval)
{
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = from + 1; j <= to; ++j) {
        const std::size_t lo = j > interval ? std::max(from, j - interval) : from;
        for (std::size_t i = lo; i < j; ++i)
            best = std::max(best, series[i].temperature - series[j].temperature);
    }
    return best;
}

double exceedance(double value, double threshold)
{
    return std::clamp(value / threshold - 1.0, 0.0, 1.0);
}

} // namespace

std::vector<FrontEvent> detect_fronts(const ForecastSeries& series, const FrontDetectionParams& params)
{
    if (series.size() < 12)
        throw Error(ErrorKind::precondition,
                    fmt::format("detect_fronts: series has {} samples, at least 12 required", series.size()));
    if (!(params.pressure_fall > 0.0) || !(params.veer > 0.0) || !(params.temperature_drop > 0.0))
        throw Error(ErrorKind::precondition, "detect_fronts: thresholds must be positive");
    if (params.window_hours < 1 || params.drop_interval_hours < 1 || params.tendency_hours < 1 ||
        params.tendency_hours > params.window_hours)
        throw Error(ErrorKind::precondition, "detect_fronts: window, tendency and drop intervals must be >= 1 h and the "
                                             "tendency interval must fit in the window");
    const auto n = series.size();
    const auto w = static_cast<std::size_t>(params.window_hours);
    const auto th = static_cast<std::size_t>(params.tendency_hours);
    const auto d = static_cast<std::size_t>(params.drop_interval_hours);
    if (w >= n)
        throw Error(ErrorKind::precondition,
                    fmt::format("detect_fronts: window {} h does not fit a {}-sample series", w, n));

    const auto tendency = pressure_tendency(series, params.tendency_hours);
    std::vector<double> dirs(n);
    for (std::size_t i = 0; i < n; ++i)
        dirs[i] = series[i].wind_dir;

    struct Firing {
        std::size_t start;
        std::size_t end;
        double veer;
    };
    std::vector<Firing> firing;
    for (std::size_t s = 0; s + w < n; ++s) {
        const std::size_t e = s + w;
        const auto tmin = min_tendency(tendency, s + th, e);
        if (tmin.value > -params.pressure_fall)
            continue;
        const double veer = accumulated_rotation(std::span(dirs).subspan(s, w + 1));
        if (std::abs(veer) < params.veer)
            continue;
        if (max_drop(series, s, e, d) < params.temperature_drop)
            continue;
        firing.push_back({s, e, veer});
    }

    std::vector<FrontEvent> events;
    for (std::size_t k = 0; k < firing.size();) {
        std::size_t start = firing[k].start;
        std::size_t end = firing[k].end;
        double veer = firing[k].veer;
        std::size_t m = k + 1;
        for (; m < firing.size() && firing[m].start <= end; ++m) {
            end = std::max(end, firing[m].end);
            if (std::abs(firing[m].veer) > std::abs(veer))
                veer = firing[m].veer;
        }
        const auto tmin = min_tendency(tendency, start + th, end);
        const double drop = max_drop(series, start, end, d);

        FrontEvent ev;
        ev.kind = FrontKind::cold_front;
        ev.onset = series[tmin.index].timestamp;
        ev.window = {series[start].timestamp, series[end].timestamp};
        ev.pressure_tendency_min = tmin.value;
        ev.wind_veer_total = veer;
        ev.temp_drop = drop;
        ev.evidence_score = (exceedance(-tmin.value, params.pressure_fall) + exceedance(std::abs(veer), params.veer) +
                             exceedance(drop, params.temperature_drop)) /
                            3.0;
        events.push_back(ev);
        k = m;
    }
    return events;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AnomalyParameter p) noexcept
{
    return p == AnomalyParameter::temperature ? "temperature" : "precipitation";
}

std::string_view to_string(AnomalySeverity s) noexcept
{
    switch (s) {
    case AnomalySeverity::none: return "none";
    case AnomalySeverity::moderate: return "moderate";
    case AnomalySeverity::high: return "high";
    }
    return "none";
}

AnomalyParameter parse_anomaly_parameter(std::string_view name)
{
    if (name == "temperature")
        return AnomalyParameter::temperature;
    if (name == "precipitation")
        return AnomalyParameter::precipitation;
    throw Error(ErrorKind::unknown_parameter,
                fmt::format("anomaly scoring supports temperature and precipitation, not '{}'", name));
}

std::vector<MonthSpan> month_spans(const ForecastSeries& series)
{
    std::vector<MonthSpan> spans;
    const int offset = series.location().utc_offset_seconds;
    for (const auto& s : series.samples()) {
        const auto c = civil_time(s.timestamp, offset);
        auto it = std::find_if(spans.begin(), spans.end(),
                               [&](const MonthSpan& m) { return m.year == c.year && m.month == c.month; });
        if (it == spans.end())
            spans.push_back({c.year, c.month, 1});
        else
            ++it->hours;
    }
    return spans;
}

AnomalySeverity z_severity(double z, const AnomalyBands& bands)
{
    const double a = std::abs(z);
    if (a >= bands.z_high)
        return AnomalySeverity::high;
    if (a >= bands.z_moderate)
        return AnomalySeverity::moderate;
    return AnomalySeverity::none;
}

AnomalyReport anomaly_score(const ForecastSeries& series, const ClimatologyNormals& normals,
                            AnomalyParameter parameter, const AnomalyBands& bands)
{
    const auto spans = month_spans(series);
    const double hours = static_cast<double>(series.size());

    double baseline = 0.0;
    double std_blend = 0.0;
    bool have_std = true;
    double month_hours = 0.0;
    for (const auto& span : spans) {
        const MonthlyNormal* normal = nullptr;
        try {
            normal = &normals.month(span.month);
        } catch (const Error&) {
            throw Error(ErrorKind::missing_month, fmt::format("climatology has no normals for month {}", span.month));
        }
        const double weight = span.hours;
        if (parameter == AnomalyParameter::temperature) {
            baseline += weight * normal->mean_temperature;
            if (normal->temperature_std)
                std_blend += weight * *normal->temperature_std;
            else
                have_std = false;
        } else {
            baseline += weight * normal->total_precipitation;
            month_hours += weight * days_in_month(span.year, span.month) * 24.0;
        }
    }
    baseline /= hours;

    AnomalyReport r;
    r.parameter = parameter;
    r.baseline_mean = baseline;

    if (parameter == AnomalyParameter::temperature) {
        double sum = 0.0;
        for (const auto& s : series.samples())
            sum += s.temperature;
        r.forecast_aggregate = sum / hours;
        r.deviation = r.forecast_aggregate - r.baseline_mean;
        if (have_std) {
            const double sd = std_blend / hours;
            r.z_score = r.deviation / sd;
            r.percentile = 50.0 * std::erfc(-*r.z_score / std::sqrt(2.0));
            r.severity = z_severity(*r.z_score, bands);
        } else {
            const double a = std::abs(r.deviation);
            r.severity = a >= bands.temp_dev_high       ? AnomalySeverity::high
                         : a >= bands.temp_dev_moderate ? AnomalySeverity::moderate
                                                        : AnomalySeverity::none;
        }
        return r;
    }

    double total = 0.0;
    for (const auto& s : series.samples())
        total += s.precipitation;
    r.forecast_aggregate = total * ((month_hours / hours) / hours);
    r.deviation = r.forecast_aggregate - r.baseline_mean;
    double ratio = 0.0;
    if (r.baseline_mean > 0.0)
        ratio = r.forecast_aggregate / r.baseline_mean;
    else if (r.forecast_aggregate > 0.0)
        ratio = std::numeric_limits<double>::infinity();
    r.severity = ratio >= bands.precip_ratio_high       ? AnomalySeverity::high
                 : ratio >= bands.precip_ratio_moderate ? AnomalySeverity::moderate
                                                        : AnomalySeverity::none;
    return r;
}

AnomalyReport anomaly_score(const ForecastSeries& series, const ClimatologyNormals& normals,
                            std::string_view parameter, const AnomalyBands& bands)
{
    return anomaly_score(series, normals, parse_anomaly_parameter(parameter), bands);
}

// ---------------------------------------------------------------------------

std::string_view to_string(HazardKind k) noexcept
{
    switch (k) {
    case HazardKind::flooding_risk: return "flooding_risk";
    case HazardKind::heavy_precipitation: return "heavy_precipitation";
    case HazardKind::high_wind: return "high_wind";
    case HazardKind::heat: return "heat";
    case HazardKind::cold: return "cold";
    case HazardKind::low_visibility: return "low_visibility";
    }
    return "";
}

std::string_view to_string(HazardSeverity s) noexcept
{
    switch (s) {
    case HazardSeverity::advisory: return "advisory";
    case HazardSeverity::warning: return "warning";
    case HazardSeverity::severe: return "severe";
    }
    return "";
}

namespace {

struct Run {
    std::size_t first;
    std::size_t last;
};

template <typename Pred>
std::vector<Run> runs_where(const ForecastSeries& series, Pred pred)
{
    std::vector<Run> runs;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!pred(series[i]))
            continue;
        if (!runs.empty() && runs.back().last + 1 == i)
            runs.back().last = i;
        else
            runs.push_back({i, i});
    }
    return runs;
}

TimeWindow span_of(const ForecastSeries& series, Run run)
{
    return {series[run.first].timestamp, series[run.last].timestamp};
}

const AnomalyReport* find_anomaly(std::span<const AnomalyReport> anomalies, AnomalyParameter p)
{
    for (const auto& a : anomalies)
        if (a.parameter == p)
            return &a;
    return nullptr;
}

HazardSeverity by_ratio(double ratio, double warning, double severe)
{
    if (ratio >= severe)
        return HazardSeverity::severe;
    if (ratio >= warning)
        return HazardSeverity::warning;
    return HazardSeverity::advisory;
}

void add_flooding(const ForecastSeries& series, const AnomalyReport& anomaly, const HazardParams& params,
                  std::vector<HazardWarning>& out)
{
    const auto w = static_cast<std::size_t>(params.flood_window_hours);
    if (w < 1 || series.size() < w)
        return;
    const auto label = fmt::format("precipitation_{}h_sum", w);
    std::vector<double> sums(series.size() - w + 1);
    for (std::size_t s = 0; s < sums.size(); ++s) {
        double sum = 0.0;
        for (std::size_t i = s; i < s + w; ++i)
            sum += series[i].precipitation;
        sums[s] = sum;
    }
    for (std::size_t s = 0; s < sums.size();) {
        if (sums[s] < params.flood_sum) {
            ++s;
            continue;
        }
        HazardWarning hw;
        hw.kind = HazardKind::flooding_risk;
        std::size_t wettest = s;
        std::size_t e = s;
        for (; e < sums.size() && sums[e] >= params.flood_sum; ++e) {
            hw.triggering_values.push_back({series[e].timestamp, label, sums[e]});
            if (sums[e] > sums[wettest])
                wettest = e;
        }
        hw.time_range = {series[wettest].timestamp, series[wettest + w - 1].timestamp};
        const bool very_wet = sums[wettest] >= 2.0 * params.flood_sum;
        const bool high_anomaly = anomaly.severity == AnomalySeverity::high;
        hw.severity = very_wet && high_anomaly   ? HazardSeverity::severe
                      : very_wet || high_anomaly ? HazardSeverity::warning
                                                 : HazardSeverity::advisory;
        hw.rationale = fmt::format(
            "{}-h precipitation total peaks at {:.1f} mm (threshold {:.1f} mm) while the forecast precipitation "
            "anomaly is {} ({:.1f} mm/month equivalent vs a normal of {:.1f} mm/month), indicating potential flooding.",
            w, sums[wettest], params.flood_sum, to_string(anomaly.severity), anomaly.forecast_aggregate,
            anomaly.baseline_mean);
        out.push_back(std::move(hw));
        s = e;
    }
}

} // namespace

std::vector<HazardWarning> detect_hazards(const ForecastSeries& series, std::span<const AnomalyReport> anomalies,
                                          const HazardParams& params)
{
    std::vector<HazardWarning> out;

    if (const auto* precip = find_anomaly(anomalies, AnomalyParameter::precipitation);
        precip && precip->severity != AnomalySeverity::none)
        add_flooding(series, *precip, params, out);

    for (const auto run : runs_where(series, [&](const HourlySample& s) {
             return s.precipitation >= params.heavy_precipitation;
         })) {
        HazardWarning hw;
        hw.kind = HazardKind::heavy_precipitation;
        hw.time_range = span_of(series, run);
        double peak = 0.0;
        for (std::size_t i = run.first; i <= run.last; ++i) {
            hw.triggering_values.push_back({series[i].timestamp, "precipitation", series[i].precipitation});
            peak = std::max(peak, series[i].precipitation);
        }
        hw.severity = by_ratio(peak / params.heavy_precipitation, 1.5, 2.0);
        hw.rationale = fmt::format("Hourly precipitation reaches {:.1f} mm/h (threshold {:.1f} mm/h) over {} h.", peak,
                                   params.heavy_precipitation, run.last - run.first + 1);
        out.push_back(std::move(hw));
    }

    const auto windy = [&](const HourlySample& s) {
        return s.wind_speed >= params.high_wind || (s.wind_gust && *s.wind_gust >= params.high_gust);
    };
    for (const auto run : runs_where(series, windy)) {
        HazardWarning hw;
        hw.kind = HazardKind::high_wind;
        hw.time_range = span_of(series, run);
        double peak_speed = 0.0;
        double peak_gust = 0.0;
        double ratio = 0.0;
        for (std::size_t i = run.first; i <= run.last; ++i) {
            const auto& s = series[i];
            peak_speed = std::max(peak_speed, s.wind_speed);
            ratio = std::max(ratio, s.wind_speed / params.high_wind);
            if (s.wind_speed >= params.high_wind)
                hw.triggering_values.push_back({s.timestamp, "wind_speed", s.wind_speed});
            if (s.wind_gust) {
                peak_gust = std::max(peak_gust, *s.wind_gust);
                ratio = std::max(ratio, *s.wind_gust / params.high_gust);
                if (*s.wind_gust >= params.high_gust)
                    hw.triggering_values.push_back({s.timestamp, "wind_gust", *s.wind_gust});
            }
        }
        hw.severity = by_ratio(ratio, 1.25, 1.5);
        hw.rationale = fmt::format("Sustained wind up to {:.1f} m/s and gusts up to {:.1f} m/s (thresholds {:.1f} m/s "
                                   "sustained, {:.1f} m/s gust).",
                                   peak_speed, peak_gust, params.high_wind, params.high_gust);
        out.push_back(std::move(hw));
    }

    if (const auto* temp = find_anomaly(anomalies, AnomalyParameter::temperature)) {
        const double baseline = temp->baseline_mean;
        const double hot = baseline + params.heat_offset;
        const double cold = baseline - params.cold_offset;
        for (const auto run : runs_where(series, [&](const HourlySample& s) { return s.temperature >= hot; })) {
            HazardWarning hw;
            hw.kind = HazardKind::heat;
            hw.time_range = span_of(series, run);
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t i = run.first; i <= run.last; ++i) {
                hw.triggering_values.push_back({series[i].timestamp, "temperature", series[i].temperature});
                peak = std::max(peak, series[i].temperature);
            }
            const double excess = peak - hot;
            hw.severity = excess >= 6.0 ? HazardSeverity::severe
                          : excess >= 3.0 ? HazardSeverity::warning
                                          : HazardSeverity::advisory;
            hw.rationale = fmt::format("Temperature reaches {:.1f} °C, {:.1f} °C above the blended monthly normal of "
                                       "{:.1f} °C (threshold +{:.1f} °C).",
                                       peak, peak - baseline, baseline, params.heat_offset);
            out.push_back(std::move(hw));
        }
        for (const auto run : runs_where(series, [&](const HourlySample& s) { return s.temperature <= cold; })) {
            HazardWarning hw;
            hw.kind = HazardKind::cold;
            hw.time_range = span_of(series, run);
            double low = std::numeric_limits<double>::infinity();
            for (std::size_t i = run.first; i <= run.last; ++i) {
                hw.triggering_values.push_back({series[i].timestamp, "temperature", series[i].temperature});
                low = std::min(low, series[i].temperature);
            }
            const double excess = cold - low;
            hw.severity = excess >= 6.0 ? HazardSeverity::severe
                          : excess >= 3.0 ? HazardSeverity::warning
                                          : HazardSeverity::advisory;
            hw.rationale = fmt::format("Temperature falls to {:.1f} °C, {:.1f} °C below the blended monthly normal of "
                                       "{:.1f} °C (threshold -{:.1f} °C).",
                                       low, baseline - low, baseline, params.cold_offset);
            out.push_back(std::move(hw));
        }
    }

    for (const auto run :
         runs_where(series, [&](const HourlySample& s) { return s.visibility < params.low_visibility; })) {
        HazardWarning hw;
        hw.kind = HazardKind::low_visibility;
        hw.time_range = span_of(series, run);
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t i = run.first; i <= run.last; ++i) {
            hw.triggering_values.push_back({series[i].timestamp, "visibility", series[i].visibility});
            low = std::min(low, series[i].visibility);
        }
        hw.severity = low < 200.0 ? HazardSeverity::severe
                      : low < 500.0 ? HazardSeverity::warning
                                    : HazardSeverity::advisory;
        hw.rationale = fmt::format("Visibility drops to {:.0f} m (threshold {:.0f} m) for {} h.", low,
                                   params.low_visibility, run.last - run.first + 1);
        out.push_back(std::move(hw));
    }

    std::stable_sort(out.begin(), out.end(), [](const HazardWarning& a, const HazardWarning& b) {
        if (a.time_range.start != b.time_range.start)
            return a.time_range.start < b.time_range.start;
        return a.kind < b.kind;
    });
    return out;
}

} // namespace meteo::diagnostics
