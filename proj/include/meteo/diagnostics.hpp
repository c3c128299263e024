#pragma once

#include "meteo/domain.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meteo::diagnostics {

struct TimeWindow {
    Timestamp start = 0;
    Timestamp end = 0;

    bool operator==(const TimeWindow&) const = default;
};

// Signed rotation from `from_deg` to `to_deg` in (-180, +180]. Positive means
// veering (clockwise). Exactly opposite directions map to +180.
double circular_diff(double from_deg, double to_deg);

// Sum of consecutive circular_diff steps along the path.
double accumulated_rotation(std::span<const double> directions_deg);

// tendency[i] = (p[i] - p[i - window_h]) / window_h in hPa/h; the first
// window_h entries are nullopt.
std::vector<std::optional<double>> pressure_tendency(const ForecastSeries& series, int window_h);

// Accumulated wind rotation across the samples in [window.start, window.end].
double wind_veer(const ForecastSeries& series, TimeWindow window);

// ---------------------------------------------------------------------------
// Fronts

struct FrontDetectionParams {
    int window_hours = 6;               // sliding window span W
    int tendency_hours = 1;             // pressure tendency differencing interval
    double pressure_fall = 1.0;         // P: min tendency must be <= -P (hPa/h)
    double veer = 45.0;                 // theta: |accumulated rotation| (deg)
    double temperature_drop = 4.0;      // dT: drop within drop_interval_hours (degC)
    int drop_interval_hours = 3;        // D

    bool operator==(const FrontDetectionParams&) const = default;
};

enum class FrontKind { cold_front };

std::string_view to_string(FrontKind k) noexcept;

struct FrontEvent {
    FrontKind kind = FrontKind::cold_front;
    Timestamp onset = 0;
    TimeWindow window;
    double pressure_tendency_min = 0.0; // hPa/h
    double wind_veer_total = 0.0;       // signed degrees
    double temp_drop = 0.0;             // degC within the drop interval
    double evidence_score = 0.0;        // [0, 1]

    bool operator==(const FrontEvent&) const = default;
};

// Slides a W-hour window (W + 1 samples) across the series. A window fires
// when all three signals cross their thresholds inside it:
//   - min pressure tendency (both differenced samples inside) <= -P
//   - |accumulated wind rotation| >= theta
//   - max T[i] - T[j] over i < j, j - i <= D, >= dT
// Firing windows that share at least one sample merge into one event whose
// window is their union. Over the merged span: onset is the timestamp of the
// tendency minimum (latest on ties, i.e. the trough side), temp_drop is the
// largest drop, wind_veer_total is the rotation of the firing window with the
// largest |rotation| (earliest on ties). evidence_score is the mean over the
// three signals of min(1, value / threshold - 1).
std::vector<FrontEvent> detect_fronts(const ForecastSeries& series, const FrontDetectionParams& params = {});

// ---------------------------------------------------------------------------
// Climatological anomalies

enum class AnomalyParameter { temperature, precipitation };
enum class AnomalySeverity { none, moderate, high };

std::string_view to_string(AnomalyParameter p) noexcept;
std::string_view to_string(AnomalySeverity s) noexcept;
// Throws ErrorKind::unknown_parameter.
AnomalyParameter parse_anomaly_parameter(std::string_view name);

struct AnomalyBands {
    double z_moderate = 1.0;
    double z_high = 2.0;
    double temp_dev_moderate = 5.0;   // degC, threshold mode
    double temp_dev_high = 8.0;
    double precip_ratio_moderate = 1.5;
    double precip_ratio_high = 2.5;

    bool operator==(const AnomalyBands&) const = default;
};

struct AnomalyReport {
    AnomalyParameter parameter = AnomalyParameter::temperature;
    double forecast_aggregate = 0.0; // degC mean, or mm/month-equivalent
    double baseline_mean = 0.0;      // hour-weighted blend of monthly normals
    double deviation = 0.0;          // forecast_aggregate - baseline_mean
    std::optional<double> z_score;
    std::optional<double> percentile; // [0, 100], standard normal CDF of z
    AnomalySeverity severity = AnomalySeverity::none;

    bool operator==(const AnomalyReport&) const = default;
};

// Hours the series spends in each calendar month, in the location's local
// time, ordered by first appearance.
struct MonthSpan {
    int year = 0;
    unsigned month = 0;
    int hours = 0;

    bool operator==(const MonthSpan&) const = default;
};

std::vector<MonthSpan> month_spans(const ForecastSeries& series);

// Temperature: mean of hourly temperature vs the hour-weighted blend of
// monthly means; z-score mode when every spanned month carries a std.
// Precipitation: series total scaled to a monthly rate
// (total * hours_in_month / series_hours, hour-weighted over spanned months)
// vs the blended monthly totals; always threshold mode (ratio bands).
AnomalyReport anomaly_score(const ForecastSeries& series, const ClimatologyNormals& normals,
                            AnomalyParameter parameter, const AnomalyBands& bands = {});
AnomalyReport anomaly_score(const ForecastSeries& series, const ClimatologyNormals& normals,
                            std::string_view parameter, const AnomalyBands& bands = {});

// Severity band lookup, exposed for monotonicity tests.
AnomalySeverity z_severity(double z, const AnomalyBands& bands = {});

// ---------------------------------------------------------------------------
// Hazards

enum class HazardKind { flooding_risk, heavy_precipitation, high_wind, heat, cold, low_visibility };
enum class HazardSeverity { advisory, warning, severe };

std::string_view to_string(HazardKind k) noexcept;
std::string_view to_string(HazardSeverity s) noexcept;

struct HazardParams {
    double heavy_precipitation = 7.0; // mm/h
    int flood_window_hours = 6;
    double flood_sum = 30.0;          // mm over flood_window_hours
    double high_wind = 17.0;          // m/s sustained
    double high_gust = 25.0;          // m/s
    double heat_offset = 8.0;         // degC above blended normal
    double cold_offset = 8.0;         // degC below blended normal
    double low_visibility = 1000.0;   // m, strict

    bool operator==(const HazardParams&) const = default;
};

struct TriggeringValue {
    Timestamp timestamp = 0;
    std::string parameter; // sample field name, or "precipitation_6h_sum"
    double value = 0.0;

    bool operator==(const TriggeringValue&) const = default;
};

struct HazardWarning {
    HazardKind kind = HazardKind::heavy_precipitation;
    HazardSeverity severity = HazardSeverity::advisory;
    TimeWindow time_range;
    std::string rationale;
    std::vector<TriggeringValue> triggering_values;

    bool operator==(const HazardWarning&) const = default;
};

// Per-sample threshold hazards are grouped into contiguous runs, one warning
// per run. flooding_risk needs a precipitation anomaly of at least moderate
// severity plus a rolling flood_window_hours sum >= flood_sum; consecutive
// qualifying windows form one warning whose time_range is the wettest window.
// heat/cold only run when a temperature anomaly (and so a baseline) is given.
// Output is sorted by time_range.start, then kind.
std::vector<HazardWarning> detect_hazards(const ForecastSeries& series, std::span<const AnomalyReport> anomalies,
                                          const HazardParams& params = {});

} // namespace meteo::diagnostics
