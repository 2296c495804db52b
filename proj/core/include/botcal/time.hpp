#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace botcal {

using Timestamp = std::chrono::sys_seconds;

inline constexpr double kSecondsPerDay = 86400.0;

// Parses `YYYY-MM-DDTHH:MM:SSZ` (also accepts a `+00:00` suffix). Throws ParseError.
Timestamp parse_timestamp(std::string_view text);

// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);

inline double days_between(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / kSecondsPerDay;
}

}  // namespace botcal
