#include "ltrlab/date.hpp"

#include <charconv>
#include <cstdio>

#include "ltrlab/error.hpp"

namespace ltrlab {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return !s.empty();
}

int to_int(std::string_view s) {
  int value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

}  // namespace

Day parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
      !all_digits(text.substr(8, 2))) {
    throw ParseError("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{
      std::chrono::year{to_int(text.substr(0, 4))},
      std::chrono::month{static_cast<unsigned>(to_int(text.substr(5, 2)))},
      std::chrono::day{static_cast<unsigned>(to_int(text.substr(8, 2)))}};
  if (!ymd.ok()) {
    throw ParseError("bad date '" + std::string(text) + "', no such calendar day");
  }
  return Day{ymd};
}

std::string format_day(Day day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace ltrlab
