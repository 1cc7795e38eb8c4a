#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace crowdnotes {

// All timestamps are UTC with seconds precision.
using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

Timestamp from_epoch_seconds(std::int64_t seconds);
// Millisecond epochs (the public notes dump convention) are truncated.
Timestamp from_epoch_millis(std::int64_t millis);
std::int64_t to_epoch_seconds(Timestamp t);

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional fractional
// seconds and an optional "Z" or "+00:00" suffix. Other offsets are applied.
std::optional<Timestamp> parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp t);

std::optional<Day> parse_date(std::string_view text);
std::string format_date(Day day);
Day day_of(Timestamp t);

}  // namespace crowdnotes
