#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace meteo {

// UTC epoch seconds.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerHour = 3600;

struct CivilTime {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
    unsigned hour = 0;
    unsigned minute = 0;
};

// Calendar fields of `t` shifted by `offset_seconds` (local wall-clock).
CivilTime civil_time(Timestamp t, int offset_seconds = 0);

unsigned days_in_month(int year, unsigned month);

// "2025-06-29T18:00Z"
std::string iso_utc(Timestamp t);

// "2025-06-29 20:00" in the zone given by the offset.
std::string local_time(Timestamp t, int offset_seconds);

// "+02:00", "-05:30"
std::string utc_offset_label(int offset_seconds);

// Accepts "YYYY-MM-DDTHH:MM[:SS]Z". Returns nullopt on anything else.
std::optional<Timestamp> parse_iso_utc(std::string_view text);

} // namespace meteo
