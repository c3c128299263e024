#include "support.hpp"

#include "meteo/error.hpp"

#include <boost/property_tree/detail/rapidxml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace testing {

using meteo::ForecastSeries;
using meteo::HourlySample;
using meteo::Timestamp;
namespace dx = meteo::diagnostics;

fs::path source_dir()
{
    return METEO_SOURCE_DIR;
}

fs::path data_dir()
{
    return source_dir() / "tests" / "data";
}

fs::path fixture_dir()
{
    return data_dir() / "fixtures";
}

fs::path golden_dir()
{
    return source_dir() / "tests" / "golden";
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

std::string check_golden(const fs::path& golden, const std::string& actual)
{
    if (const char* update = std::getenv("METEO_UPDATE_GOLDEN"); update && std::string(update) == "1") {
        write_file(golden, actual);
        return {};
    }
    if (!fs::exists(golden))
        return "golden file missing: " + golden.string() + " (run with METEO_UPDATE_GOLDEN=1 to create it)";
    const auto expected = read_file(golden);
    if (expected == actual)
        return {};
    const auto mismatch = std::mismatch(expected.begin(), expected.end(), actual.begin(), actual.end());
    const auto offset = static_cast<std::size_t>(mismatch.first - expected.begin());
    const auto line = std::count(expected.begin(), mismatch.first, '\n') + 1;
    return "differs from " + golden.filename().string() + " at byte " + std::to_string(offset) + " (line " +
           std::to_string(line) + "), sizes " + std::to_string(expected.size()) + " vs " +
           std::to_string(actual.size());
}

fs::path temp_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    auto dir = fs::temp_directory_path() /
               ("meteo-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

meteo::net::HttpResponse RefusingHttpClient::get(const std::string& url, const meteo::net::Headers&)
{
    ++calls_;
    throw meteo::Error(meteo::ErrorKind::network, "offline test: refused GET " + url);
}

meteo::net::HttpResponse RefusingHttpClient::post(const std::string& url, const std::string&, const std::string&,
                                                  const meteo::net::Headers&)
{
    ++calls_;
    throw meteo::Error(meteo::ErrorKind::network, "offline test: refused POST " + url);
}

meteo::net::HttpResponse ScriptedHttpClient::next()
{
    if (responses_.empty())
        throw meteo::Error(meteo::ErrorKind::network, "no scripted response");
    const auto& r = responses_[std::min(cursor_, responses_.size() - 1)];
    ++cursor_;
    if (r.status == 0)
        throw meteo::Error(meteo::ErrorKind::network, "scripted connection failure");
    return r;
}

meteo::net::HttpResponse ScriptedHttpClient::get(const std::string& url, const meteo::net::Headers& headers)
{
    requests.push_back({"GET", url, "", headers});
    return next();
}

meteo::net::HttpResponse ScriptedHttpClient::post(const std::string& url, const std::string& body,
                                                  const std::string&, const meteo::net::Headers& headers)
{
    requests.push_back({"POST", url, body, headers});
    return next();
}

// ---------------------------------------------------------------------------

HourlySample calm_sample(Timestamp t)
{
    HourlySample s;
    s.timestamp = t;
    s.temperature = 15.0;
    s.feels_like = 14.5;
    s.dew_point = 9.0;
    s.humidity = 65.0;
    s.pressure = 1013.0;
    s.wind_speed = 4.0;
    s.wind_gust = 6.0;
    s.wind_dir = 240.0;
    s.precipitation = 0.0;
    s.cloud_cover = 30.0;
    s.visibility = 10000.0;
    s.uv_index = 0.0;
    s.condition_code = 802;
    return s;
}

ForecastSeries make_series(const SeriesSpec& spec)
{
    std::vector<HourlySample> samples;
    for (std::size_t i = 0; i < spec.hours; ++i) {
        auto s = calm_sample(spec.start + static_cast<Timestamp>(i) * 3600);
        const auto pick = [i](const std::vector<double>& v, double& field) {
            if (i < v.size())
                field = v[i];
        };
        pick(spec.pressure, s.pressure);
        pick(spec.wind_dir, s.wind_dir);
        pick(spec.temperature, s.temperature);
        pick(spec.precipitation, s.precipitation);
        pick(spec.wind_speed, s.wind_speed);
        pick(spec.visibility, s.visibility);
        samples.push_back(s);
    }
    return ForecastSeries::create({"synthetic", 54.3, 10.1, spec.utc_offset_seconds}, std::move(samples));
}

meteo::ClimatologyNormals uniform_normals(double mean_temperature, std::optional<double> std, double precipitation)
{
    std::vector<meteo::MonthlyNormal> months;
    for (unsigned m = 1; m <= 12; ++m)
        months.push_back({m, mean_temperature, std, precipitation});
    return meteo::ClimatologyNormals::create(std::move(months), 20);
}

namespace {

double wrap360(double d)
{
    d = std::fmod(d, 360.0);
    if (d < 0)
        d += 360.0;
    if (d >= 360.0)
        d = 0.0;
    return d;
}

} // namespace

ForecastSeries random_front_series(std::mt19937_64& rng, std::size_t hours, std::optional<FrontInjection> inject,
                                   bool decoy)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };

    std::vector<double> p(hours), dir(hours), temp(hours);
    // Background: |tendency| <= 0.6 hPa/h, at most 5 deg/h of rotation (so at
    // most 30 deg in a 6 h window), and a diurnal cycle whose 3 h drop stays
    // below 2.5 degC.
    p[0] = uni(1000.0, 1025.0);
    dir[0] = uni(0.0, 360.0);
    const double amp = uni(0.5, 3.0);
    const double phase = uni(0.0, 24.0);
    const double base = uni(5.0, 25.0);
    for (std::size_t i = 0; i < hours; ++i) {
        if (i > 0) {
            p[i] = p[i - 1] + uni(-0.6, 0.6);
            dir[i] = wrap360(dir[i - 1] + uni(-5.0, 5.0));
        }
        temp[i] = base + amp * std::cos(2.0 * M_PI * (static_cast<double>(i) - phase) / 24.0);
    }

    const auto add_fall = [&](std::size_t c, double fall) {
        for (std::size_t i = c; i < hours; ++i)
            p[i] -= fall;
        // Recover over the following hours.
        for (std::size_t i = c + 1; i < hours; ++i)
            p[i] += std::min(fall, 0.5 * fall * static_cast<double>(i - c));
    };
    const auto add_veer = [&](std::size_t c, double total) {
        // Rotation spread over c-2 .. c+1 (four steps).
        for (std::size_t i = c - 2; i < hours; ++i) {
            const double steps = std::min<double>(4.0, static_cast<double>(i - (c - 2)) + 1.0);
            dir[i] = wrap360(dir[i] + total * steps / 4.0);
        }
    };
    const auto add_drop = [&](std::size_t c, double drop) {
        for (std::size_t i = c; i < hours; ++i) {
            const double frac = std::min(1.0, static_cast<double>(i - c + 1) / 3.0);
            temp[i] -= drop * frac;
        }
    };

    if (inject) {
        const auto c = inject->index;
        // Margins over the thresholds cover the background: up to 0.6 hPa/h
        // of noise, 30 deg of rotation per window and 2.3 degC of diurnal
        // change over 3 h.
        add_fall(c, uni(1.6, 3.5));
        add_veer(c, uni(80.0, 120.0) * (u(rng) < 0.85 ? 1.0 : -1.0));
        add_drop(c, uni(7.0, 10.0));
    }
    if (decoy) {
        // One or two signals, or all three spread far apart in time.
        const int which = static_cast<int>(u(rng) * 7.0);
        const std::size_t a = 10 + static_cast<std::size_t>(u(rng) * static_cast<double>(hours / 2 - 12));
        const std::size_t b = std::min(hours - 6, a + 14 + static_cast<std::size_t>(u(rng) * 6.0));
        switch (which) {
        case 0: add_fall(a, uni(1.6, 3.0)); break;
        case 1: add_veer(a, uni(60.0, 120.0)); break;
        case 2: add_drop(a, uni(5.0, 8.0)); break;
        case 3: add_fall(a, uni(1.6, 3.0)); add_veer(a, uni(60.0, 120.0)); break;
        case 4: add_veer(a, uni(60.0, 120.0)); add_drop(a, uni(5.0, 8.0)); break;
        case 5: add_fall(a, uni(1.6, 3.0)); add_drop(a, uni(5.0, 8.0)); break;
        default: add_fall(a, uni(1.6, 3.0)); add_veer(b, uni(60.0, 120.0)); add_drop(a, uni(5.0, 8.0)); break;
        }
    }

    for (auto& v : p)
        v = std::clamp(v, 900.0, 1080.0);
    SeriesSpec spec;
    spec.start = 1735689600 + static_cast<Timestamp>(u(rng) * 365.0) * 86400;
    spec.hours = hours;
    spec.pressure = p;
    spec.wind_dir = dir;
    spec.temperature = temp;
    return make_series(spec);
}

ForecastSeries random_series(std::mt19937_64& rng, std::size_t hours, bool with_gusts)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
    std::vector<HourlySample> samples;
    const Timestamp start = 1735689600 + static_cast<Timestamp>(u(rng) * 8760.0) * 3600;
    for (std::size_t i = 0; i < hours; ++i) {
        HourlySample s;
        s.timestamp = start + static_cast<Timestamp>(i) * 3600;
        s.temperature = uni(-30.0, 42.0);
        s.feels_like = s.temperature + uni(-6.0, 3.0);
        s.dew_point = s.temperature - uni(0.0, 20.0);
        s.humidity = std::round(uni(0.0, 100.0));
        s.pressure = std::round(uni(950.0, 1050.0));
        s.wind_speed = uni(0.0, 35.0);
        if (with_gusts)
            s.wind_gust = s.wind_speed + uni(0.0, 15.0);
        s.wind_dir = std::floor(uni(0.0, 360.0));
        s.precipitation = u(rng) < 0.6 ? 0.0 : uni(0.0, 25.0);
        s.cloud_cover = std::round(uni(0.0, 100.0));
        s.visibility = std::round(uni(50.0, 10000.0));
        s.uv_index = uni(0.0, 11.0);
        s.condition_code = 200 + static_cast<int>(u(rng) * 605.0);
        samples.push_back(s);
    }
    const int offset = 3600 * static_cast<int>(uni(-11.0, 14.0));
    return ForecastSeries::create({"random", uni(-80.0, 80.0), uni(-179.0, 179.0), offset}, std::move(samples));
}

// ---------------------------------------------------------------------------

double oracle_circular_diff(double from, double to)
{
    const double rad = M_PI / 180.0;
    const double a = (to - from) * rad;
    double d = std::atan2(std::sin(a), std::cos(a)) / rad;
    if (d <= -180.0 + 1e-9)
        d = 180.0;
    return d;
}

double oracle_path_sum(const ForecastSeries& s, Timestamp start, Timestamp end)
{
    double total = 0.0;
    const HourlySample* prev = nullptr;
    for (const auto& x : s.samples()) {
        if (x.timestamp < start || x.timestamp > end)
            continue;
        if (prev)
            total += oracle_circular_diff(prev->wind_dir, x.wind_dir);
        prev = &x;
    }
    return total;
}

namespace {

struct WindowEval {
    std::size_t first = 0;
    std::size_t last = 0; // inclusive
    bool fires = false;
    double veer = 0.0;
};

WindowEval evaluate_window(const ForecastSeries& s, const dx::FrontDetectionParams& p, std::size_t first)
{
    WindowEval w;
    w.first = first;
    w.last = first + static_cast<std::size_t>(p.window_hours);
    const int th = p.tendency_hours;

    double tmin = HUGE_VAL;
    for (std::size_t i = w.first + static_cast<std::size_t>(th); i <= w.last; ++i)
        tmin = std::min(tmin, (s[i].pressure - s[i - static_cast<std::size_t>(th)].pressure) / th);

    double veer = 0.0;
    for (std::size_t i = w.first + 1; i <= w.last; ++i)
        veer += oracle_circular_diff(s[i - 1].wind_dir, s[i].wind_dir);

    double drop = -HUGE_VAL;
    for (std::size_t i = w.first; i <= w.last; ++i)
        for (std::size_t j = i + 1; j <= w.last && j - i <= static_cast<std::size_t>(p.drop_interval_hours); ++j)
            drop = std::max(drop, s[i].temperature - s[j].temperature);

    w.veer = veer;
    // The 1e-9 slack absorbs the summation-order difference between this
    // oracle's atan2 steps and the production fmod steps at the threshold.
    w.fires = tmin <= -p.pressure_fall && std::abs(veer) >= p.veer - 1e-9 && drop >= p.temperature_drop;
    return w;
}

} // namespace

std::vector<dx::FrontEvent> oracle_detect_fronts(const ForecastSeries& s, const dx::FrontDetectionParams& p)
{
    const std::size_t n = s.size();
    const auto W = static_cast<std::size_t>(p.window_hours);
    std::vector<WindowEval> firing;
    for (std::size_t first = 0; first + W < n; ++first) {
        auto w = evaluate_window(s, p, first);
        if (w.fires)
            firing.push_back(w);
    }

    // Groups: start with one group per window, merge any two groups that
    // share a sample until nothing changes.
    struct Group {
        std::size_t first, last;
        std::vector<WindowEval> members;
    };
    std::vector<Group> groups;
    for (const auto& w : firing)
        groups.push_back({w.first, w.last, {w}});
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t a = 0; a < groups.size() && !changed; ++a)
            for (std::size_t b = a + 1; b < groups.size() && !changed; ++b)
                if (groups[a].first <= groups[b].last && groups[b].first <= groups[a].last) {
                    groups[a].first = std::min(groups[a].first, groups[b].first);
                    groups[a].last = std::max(groups[a].last, groups[b].last);
                    groups[a].members.insert(groups[a].members.end(), groups[b].members.begin(),
                                             groups[b].members.end());
                    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
                    changed = true;
                }
    }
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.first < b.first; });

    std::vector<dx::FrontEvent> events;
    for (auto& g : groups) {
        dx::FrontEvent e;
        e.window = {s[g.first].timestamp, s[g.last].timestamp};
        const int th = p.tendency_hours;
        double tmin = HUGE_VAL;
        std::size_t at = 0;
        for (std::size_t i = g.first + static_cast<std::size_t>(th); i <= g.last; ++i) {
            const double t = (s[i].pressure - s[i - static_cast<std::size_t>(th)].pressure) / th;
            if (t <= tmin) { // latest index wins ties
                tmin = t;
                at = i;
            }
        }
        e.onset = s[at].timestamp;
        e.pressure_tendency_min = tmin;

        double drop = -HUGE_VAL;
        for (std::size_t i = g.first; i <= g.last; ++i)
            for (std::size_t j = i + 1; j <= g.last && j - i <= static_cast<std::size_t>(p.drop_interval_hours); ++j)
                drop = std::max(drop, s[i].temperature - s[j].temperature);
        e.temp_drop = drop;

        std::sort(g.members.begin(), g.members.end(),
                  [](const WindowEval& a, const WindowEval& b) { return a.first < b.first; });
        double best = 0.0;
        bool have = false;
        for (const auto& m : g.members)
            if (!have || std::abs(m.veer) > std::abs(best)) {
                best = m.veer;
                have = true;
            }
        e.wind_veer_total = best;

        const auto part = [](double value, double threshold) {
            return std::clamp(value / threshold - 1.0, 0.0, 1.0);
        };
        e.evidence_score = (part(-tmin, p.pressure_fall) + part(std::abs(best), p.veer) +
                            part(drop, p.temperature_drop)) /
                           3.0;
        events.push_back(e);
    }
    return events;
}

std::pair<int, int> oracle_year_month(Timestamp t, int utc_offset_seconds)
{
    const std::time_t local = static_cast<std::time_t>(t + utc_offset_seconds);
    std::tm tm{};
    gmtime_r(&local, &tm);
    return {tm.tm_year + 1900, tm.tm_mon + 1};
}

double oracle_blended_temperature(const ForecastSeries& s, const meteo::ClimatologyNormals& n)
{
    double sum = 0.0;
    for (const auto& x : s.samples()) {
        const auto [y, m] = oracle_year_month(x.timestamp, s.location().utc_offset_seconds);
        (void)y;
        sum += n.month(static_cast<unsigned>(m)).mean_temperature;
    }
    return sum / static_cast<double>(s.size());
}

std::vector<double> oracle_rolling_sums(const ForecastSeries& s, int w)
{
    std::vector<double> out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(w) <= s.size(); ++i) {
        double sum = 0.0;
        for (std::size_t k = i; k < i + static_cast<std::size_t>(w); ++k)
            sum += s[k].precipitation;
        out.push_back(sum);
    }
    return out;
}

std::string xml_problem(const std::string& text)
{
    namespace rx = boost::property_tree::detail::rapidxml;
    std::vector<char> buf(text.begin(), text.end());
    buf.push_back('\0');
    rx::xml_document<char> doc;
    try {
        doc.parse<rx::parse_validate_closing_tags>(buf.data());
    } catch (const rx::parse_error& e) {
        return std::string("parse error: ") + e.what() + " near offset " +
               std::to_string(e.where<char>() - buf.data());
    }
    int roots = 0;
    for (auto* node = doc.first_node(); node; node = node->next_sibling())
        if (node->type() == rx::node_element)
            ++roots;
    if (roots != 1)
        return "expected one root element, found " + std::to_string(roots);
    return {};
}

std::size_t count_of(const std::string& haystack, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = haystack.find(needle); p != std::string::npos; p = haystack.find(needle, p + needle.size()))
        ++n;
    return n;
}

} // namespace testing

namespace testing {

using nlohmann::json;

std::string onecall_payload(const ForecastSeries& series, meteo::ingest::UnitSystem units)
{
    using meteo::ingest::UnitSystem;
    const auto temp = [units](double c) {
        switch (units) {
        case UnitSystem::standard: return c + 273.15;
        case UnitSystem::imperial: return c * 9.0 / 5.0 + 32.0;
        case UnitSystem::metric: break;
        }
        return c;
    };
    const auto speed = [units](double ms) { return units == UnitSystem::imperial ? ms / 0.44704 : ms; };

    json hourly = json::array();
    for (const auto& s : series.samples()) {
        json h = {
            {"dt", s.timestamp},
            {"temp", temp(s.temperature)},
            {"feels_like", temp(s.feels_like)},
            {"dew_point", temp(s.dew_point)},
            {"humidity", s.humidity},
            {"pressure", s.pressure},
            {"wind_speed", speed(s.wind_speed)},
            {"wind_deg", s.wind_dir},
            {"clouds", s.cloud_cover},
            {"visibility", s.visibility},
            {"uvi", s.uv_index},
            {"weather", json::array({{{"id", s.condition_code}, {"main", "x"}}})},
        };
        if (s.wind_gust)
            h["wind_gust"] = speed(*s.wind_gust);
        if (s.precipitation > 0.0)
            h["rain"] = {{"1h", s.precipitation}};
        hourly.push_back(h);
    }
    return json{{"lat", series.location().latitude},
                {"lon", series.location().longitude},
                {"timezone", "Etc/Test"},
                {"timezone_offset", series.location().utc_offset_seconds},
                {"hourly", hourly}}
        .dump();
}

namespace {

std::string compare_number(const std::string& what, double actual, const json& expected)
{
    if (!expected.is_number())
        return what + ": expected value is not a number";
    if (actual != expected.get<double>())
        return what + ": got " + json(actual).dump() + ", expected " + expected.dump();
    return {};
}

std::string compare_forecast(const ForecastSeries& s, const json& e)
{
    if (s.location().utc_offset_seconds != e.at("utc_offset_seconds").get<int>())
        return "utc_offset_seconds differs";
    const auto& samples = e.at("samples");
    if (s.size() != samples.size())
        return "sample count " + std::to_string(s.size()) + " vs expected " + std::to_string(samples.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& x = s[i];
        const auto& ex = samples[i];
        const auto at = "samples[" + std::to_string(i) + "].";
        if (x.timestamp != ex.at("timestamp").get<meteo::Timestamp>())
            return at + "timestamp differs";
        for (const auto& [name, value] : std::vector<std::pair<const char*, double>>{
                 {"temperature", x.temperature},
                 {"feels_like", x.feels_like},
                 {"dew_point", x.dew_point},
                 {"humidity", x.humidity},
                 {"pressure", x.pressure},
                 {"wind_speed", x.wind_speed},
                 {"wind_dir", x.wind_dir},
                 {"precipitation", x.precipitation},
                 {"cloud_cover", x.cloud_cover},
                 {"visibility", x.visibility},
                 {"uv_index", x.uv_index},
             })
            if (auto problem = compare_number(at + name, value, ex.at(name)); !problem.empty())
                return problem;
        const auto& gust = ex.at("wind_gust");
        if (gust.is_null() != !x.wind_gust.has_value())
            return at + "wind_gust presence differs";
        if (x.wind_gust)
            if (auto problem = compare_number(at + "wind_gust", *x.wind_gust, gust); !problem.empty())
                return problem;
        if (x.condition_code != ex.at("condition_code").get<int>())
            return at + "condition_code differs";
    }
    return {};
}

std::string compare_normals(const meteo::ClimatologyNormals& n, const json& e)
{
    if (n.baseline_years() != e.at("baseline_years").get<int>())
        return "baseline_years " + std::to_string(n.baseline_years()) + " vs expected " +
               e.at("baseline_years").dump();
    for (const auto& em : e.at("months")) {
        const auto m = em.at("month").get<unsigned>();
        const auto& x = n.month(m);
        const auto at = "month " + std::to_string(m) + ".";
        if (auto p = compare_number(at + "mean_temperature", x.mean_temperature, em.at("mean_temperature")); !p.empty())
            return p;
        if (auto p = compare_number(at + "total_precipitation", x.total_precipitation, em.at("total_precipitation"));
            !p.empty())
            return p;
        const auto& std = em.at("temperature_std");
        if (std.is_null() != !x.temperature_std.has_value())
            return at + "temperature_std presence differs";
        if (x.temperature_std)
            if (auto p = compare_number(at + "temperature_std", *x.temperature_std, std); !p.empty())
                return p;
    }
    if (e.at("months").size() != 12)
        return "expected file does not list 12 months";
    return {};
}

std::string compare_geo(const meteo::GeoContext& g, const json& e)
{
    if (g.place_name != e.at("place_name").get<std::string>())
        return "place_name '" + g.place_name + "' vs expected " + e.at("place_name").dump();
    if (auto p = compare_number("latitude", g.latitude, e.at("latitude")); !p.empty())
        return p;
    if (auto p = compare_number("longitude", g.longitude, e.at("longitude")); !p.empty())
        return p;
    if (std::string(to_string(g.region_kind)) != e.at("region").get<std::string>())
        return "region " + std::string(to_string(g.region_kind)) + " vs expected " + e.at("region").dump();
    if (std::string(to_string(g.terrain_kind)) != e.at("terrain").get<std::string>())
        return "terrain " + std::string(to_string(g.terrain_kind)) + " vs expected " + e.at("terrain").dump();
    const auto& ele = e.at("elevation");
    if (ele.is_null() != !g.elevation.has_value())
        return "elevation presence differs";
    if (g.elevation)
        return compare_number("elevation", *g.elevation, ele);
    return {};
}

} // namespace

std::string run_ingest_case(const json& manifest, const json& entry)
{
    namespace ig = meteo::ingest;
    const auto& loc_json = manifest.at("location");
    const meteo::LocationRef loc{loc_json.at("name").get<std::string>(), loc_json.at("latitude").get<double>(),
                                 loc_json.at("longitude").get<double>(), 0};
    const auto dir = data_dir() / "ingest";
    const auto file = entry.at("file").get<std::string>();
    const auto source = entry.at("source").get<std::string>();
    const auto label = file + ": ";

    std::string payload;
    try {
        payload = ig::load_fixture(dir / file);
    } catch (const std::exception& e) {
        return label + e.what();
    }

    try {
        std::string problem;
        if (source == "forecast") {
            const auto units = ig::parse_unit_system(entry.value("units", "metric"));
            const auto series = ig::parse_onecall(payload, loc, units, entry.value("horizon", 120));
            if (entry.contains("error"))
                return label + "parsed, but expected error " + entry.at("error").get<std::string>();
            problem = compare_forecast(series, json::parse(read_file(dir / entry.at("expected").get<std::string>())));
        } else if (source == "climatology") {
            const auto normals = ig::parse_meteostat_normals(payload, 20);
            if (entry.contains("error"))
                return label + "parsed, but expected error " + entry.at("error").get<std::string>();
            problem = compare_normals(normals, json::parse(read_file(dir / entry.at("expected").get<std::string>())));
        } else if (source == "geo") {
            const auto geo = ig::parse_nominatim_reverse(payload, loc);
            if (entry.contains("error"))
                return label + "parsed, but expected error " + entry.at("error").get<std::string>();
            problem = compare_geo(geo, json::parse(read_file(dir / entry.at("expected").get<std::string>())));
        } else {
            return label + "unknown source " + source;
        }
        return problem.empty() ? std::string{} : label + problem;
    } catch (const meteo::Error& e) {
        if (!entry.contains("error"))
            return label + "unexpected error: " + e.what();
        const auto want = entry.at("error").get<std::string>();
        if (std::string(meteo::to_string(e.kind())) != want)
            return label + "error kind " + std::string(meteo::to_string(e.kind())) + " (" + e.what() +
                   "), expected " + want;
        return {};
    }
}

} // namespace testing

#include <regex>

namespace testing {

bool same_fronts(const std::vector<meteo::diagnostics::FrontEvent>& a,
                 const std::vector<meteo::diagnostics::FrontEvent>& b)
{
    if (a.size() != b.size())
        return false;
    const auto near = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].kind != b[i].kind || a[i].onset != b[i].onset || a[i].window != b[i].window ||
            !near(a[i].pressure_tendency_min, b[i].pressure_tendency_min) ||
            !near(a[i].wind_veer_total, b[i].wind_veer_total) || !near(a[i].temp_drop, b[i].temp_drop) ||
            !near(a[i].evidence_score, b[i].evidence_score))
            return false;
    return true;
}

ParsedChart parse_chart_svg(const std::string& svg)
{
    ParsedChart c;
    const auto attr = [&](const std::string& name) {
        std::smatch m;
        if (!std::regex_search(svg, m, std::regex(name + "=\"([^\"]+)\"")))
            throw std::runtime_error("chart has no " + name);
        return std::stod(m[1]);
    };
    c.y_min = attr("data-y-min");
    c.y_max = attr("data-y-max");
    c.plot_top = attr("data-plot-top");
    c.plot_bottom = attr("data-plot-bottom");
    c.plot_left = attr("data-plot-left");

    const std::regex line(R"re(<polyline data-parameter="([a-z_]+)"[^>]*points="([^"]*)")re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
        c.parameters.push_back((*it)[1]);
        std::vector<std::pair<double, double>> pts;
        std::istringstream in((*it)[2].str());
        std::string pair;
        while (in >> pair) {
            const auto comma = pair.find(',');
            pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
        }
        c.points.push_back(std::move(pts));
    }
    const std::regex tick(R"re(<text class="y-tick"[^>]*>([^<]*)</text>)re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tick); it != std::sregex_iterator(); ++it)
        c.y_ticks.push_back((*it)[1]);
    return c;
}

double value_at(const ParsedChart& c, double y)
{
    return c.y_max - (y - c.plot_top) / (c.plot_bottom - c.plot_top) * (c.y_max - c.y_min);
}

} // namespace testing
