#include "voice/assessment/time.hpp"

#include <chrono>
#include <cstdio>

namespace voice::assessment {

namespace {

using namespace std::chrono;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool parse_hh_mm(std::string_view text, unsigned& hour, unsigned& minute) {
    if (text.size() != 5 || text[2] != ':') return false;
    for (std::size_t i : {0u, 1u, 3u, 4u}) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    hour = static_cast<unsigned>((text[0] - '0') * 10 + (text[1] - '0'));
    minute = static_cast<unsigned>((text[3] - '0') * 10 + (text[4] - '0'));
    return hour < 24 && minute < 60;
}

}  // namespace

UtcMinute UtcMinute::from_seconds(std::int64_t unix_seconds) {
    return UtcMinute(floor_div(unix_seconds, 60));
}

UtcMinute UtcMinute::from_civil(int year, unsigned month, unsigned day, unsigned hour, unsigned minute) {
    const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    return UtcMinute(static_cast<std::int64_t>(d.time_since_epoch().count()) * 1440 + hour * 60 + minute);
}

std::string UtcMinute::to_string() const {
    const std::int64_t day_index = floor_div(minutes_, 1440);
    const std::int64_t minute_of_day = minutes_ - day_index * 1440;
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(minute_of_day / 60), static_cast<int>(minute_of_day % 60));
    return buf;
}

std::optional<UtcMinute> UtcMinute::parse(std::string_view text) {
    // YYYY-MM-DDTHH:MMZ
    if (text.size() != 17 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[16] != 'Z') {
        return std::nullopt;
    }
    int year = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
        year = year * 10 + (text[i] - '0');
    }
    auto two = [&](std::size_t at) -> int {
        if (text[at] < '0' || text[at] > '9' || text[at + 1] < '0' || text[at + 1] > '9') return -1;
        return (text[at] - '0') * 10 + (text[at + 1] - '0');
    };
    const int month = two(5);
    const int day = two(8);
    unsigned hour = 0, minute = 0;
    if (month < 1 || day < 1 || !parse_hh_mm(text.substr(11, 5), hour, minute)) return std::nullopt;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return std::nullopt;
    return from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour, minute);
}

std::optional<UtcMinute> resolve_time(std::string_view text, UtcMinute session_start) {
    if (auto absolute = UtcMinute::parse(text)) return absolute;

    std::int64_t day_offset = 0;
    if (text.starts_with("today ")) {
        text.remove_prefix(6);
    } else if (text.starts_with("yesterday ")) {
        text.remove_prefix(10);
        day_offset = -1;
    } else {
        return std::nullopt;
    }
    unsigned hour = 0, minute = 0;
    if (!parse_hh_mm(text, hour, minute)) return std::nullopt;
    const std::int64_t start_day = floor_div(session_start.minutes_since_epoch(), 1440);
    return UtcMinute((start_day + day_offset) * 1440 + hour * 60 + minute);
}

}  // namespace voice::assessment
