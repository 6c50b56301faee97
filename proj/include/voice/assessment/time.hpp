#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace voice::assessment {

/// A UTC instant at minute resolution. All assessment timestamps use this
/// type; the wire format is `YYYY-MM-DDTHH:MMZ`.
class UtcMinute {
public:
    constexpr UtcMinute() = default;
    constexpr explicit UtcMinute(std::int64_t minutes_since_epoch) : minutes_(minutes_since_epoch) {}

    static UtcMinute from_seconds(std::int64_t unix_seconds);
    static UtcMinute from_civil(int year, unsigned month, unsigned day, unsigned hour, unsigned minute);

    constexpr std::int64_t minutes_since_epoch() const { return minutes_; }
    constexpr std::int64_t seconds_since_epoch() const { return minutes_ * 60; }

    std::string to_string() const;
    static std::optional<UtcMinute> parse(std::string_view text);

    friend constexpr auto operator<=>(const UtcMinute&, const UtcMinute&) = default;

private:
    std::int64_t minutes_ = 0;
};

/// Resolves a captured clock time against the session start.
/// Accepts `YYYY-MM-DDTHH:MMZ`, `today HH:MM` and `yesterday HH:MM`.
std::optional<UtcMinute> resolve_time(std::string_view text, UtcMinute session_start);

}  // namespace voice::assessment
