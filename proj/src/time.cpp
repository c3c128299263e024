#include "meteo/time.hpp"

#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <cstdlib>

namespace meteo {

namespace chr = std::chrono;

CivilTime civil_time(Timestamp t, int offset_seconds)
{
    const chr::sys_seconds tp{chr::seconds{t + offset_seconds}};
    const auto day = chr::floor<chr::days>(tp);
    const chr::year_month_day ymd{day};
    const chr::hh_mm_ss hms{tp - day};
    return CivilTime{
        int(ymd.year()),
        unsigned(ymd.month()),
        unsigned(ymd.day()),
        static_cast<unsigned>(hms.hours().count()),
        static_cast<unsigned>(hms.minutes().count()),
    };
}

unsigned days_in_month(int year, unsigned month)
{
    const chr::year_month_day_last last{chr::year{year}, chr::month_day_last{chr::month{month}}};
    return unsigned(last.day());
}

std::string iso_utc(Timestamp t)
{
    const auto c = civil_time(t);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}Z", c.year, c.month, c.day, c.hour, c.minute);
}

std::string local_time(Timestamp t, int offset_seconds)
{
    const auto c = civil_time(t, offset_seconds);
    return fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}", c.year, c.month, c.day, c.hour, c.minute);
}

std::string utc_offset_label(int offset_seconds)
{
    const char sign = offset_seconds < 0 ? '-' : '+';
    const int abs = std::abs(offset_seconds);
    return fmt::format("{}{:02d}:{:02d}", sign, abs / 3600, (abs % 3600) / 60);
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out)
{
    if (pos + len > text.size())
        return false;
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
}

} // namespace

std::optional<Timestamp> parse_iso_utc(std::string_view text)
{
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || text.size() < 17 || text[4] != '-' || !read_int(text, 5, 2, mo) ||
        text[7] != '-' || !read_int(text, 8, 2, d) || text[10] != 'T' || !read_int(text, 11, 2, h) ||
        text[13] != ':' || !read_int(text, 14, 2, mi))
        return std::nullopt;
    std::size_t pos = 16;
    if (text.size() > pos && text[pos] == ':') {
        if (!read_int(text, pos + 1, 2, s))
            return std::nullopt;
        pos += 3;
    }
    if (text.size() != pos + 1 || text[pos] != 'Z')
        return std::nullopt;
    const chr::year_month_day ymd{chr::year{y}, chr::month{unsigned(mo)}, chr::day{unsigned(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
        return std::nullopt;
    const chr::sys_seconds tp = chr::sys_days{ymd} + chr::hours{h} + chr::minutes{mi} + chr::seconds{s};
    return tp.time_since_epoch().count();
}

} // namespace meteo
