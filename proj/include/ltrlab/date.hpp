#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ltrlab {

/// UTC calendar day. All engagement data is aggregated at this granularity.
using Day = std::chrono::sys_days;

/// Parses a strict `YYYY-MM-DD` string. Throws ParseError on anything else,
/// including impossible dates such as 2023-02-30.
Day parse_day(std::string_view text);

std::string format_day(Day day);

inline Day add_days(Day day, int n) { return day + std::chrono::days{n}; }

/// Signed number of days from `from` to `to`.
inline int days_between(Day from, Day to) {
  return static_cast<int>((to - from).count());
}

}  // namespace ltrlab
