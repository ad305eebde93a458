#pragma once

// Daily (query, product, source) engagement logs and the query vertical map.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltrlab/date.hpp"

namespace ltrlab::events {

enum class Source : std::uint8_t { kWeb, kApp };

inline constexpr std::array<Source, 2> kAllSources{Source::kWeb, Source::kApp};

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view text);

/// Business segment of a query. The enum order is the one-hot column order.
enum class Vertical : std::uint8_t { kFood, kConsumables, kHome, kHardlines, kFashion, kEts };

inline constexpr std::size_t kNumVerticals = 6;
inline constexpr std::array<Vertical, kNumVerticals> kAllVerticals{
    Vertical::kFood,      Vertical::kConsumables, Vertical::kHome,
    Vertical::kHardlines, Vertical::kFashion,     Vertical::kEts};

std::string_view to_string(Vertical vertical);
std::optional<Vertical> parse_vertical(std::string_view text);

/// Funnel counts for one day or summed over a window.
struct Counts {
  std::int64_t examines = 0;
  std::int64_t clicks = 0;
  std::int64_t atcs = 0;
  std::int64_t orders = 0;

  Counts& operator+=(const Counts& other) {
    examines += other.examines;
    clicks += other.clicks;
    atcs += other.atcs;
    orders += other.orders;
    return *this;
  }
  Counts& operator-=(const Counts& other) {
    examines -= other.examines;
    clicks -= other.clicks;
    atcs -= other.atcs;
    orders -= other.orders;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct EngagementEvent {
  std::string query_id;
  std::string product_id;
  Source source = Source::kWeb;
  Day day{};
  Counts counts;

  friend bool operator==(const EngagementEvent&, const EngagementEvent&) = default;
};

/// Canonical order: (query_id, product_id, source, day).
bool event_key_less(const EngagementEvent& a, const EngagementEvent& b);

/// Lookback window covering [reference_date - length_days + 1, reference_date].
struct WindowSpec {
  int length_days = 1;
  Day reference_date{};

  Day first_day() const { return add_days(reference_date, 1 - length_days); }
  bool contains(Day day) const { return day >= first_day() && day <= reference_date; }
};

struct ValidationIssue {
  enum class Kind { kRejected, kClamped };
  std::size_t line = 0;  // 1-based input line; for clamps, the first line of the merged record
  Kind kind = Kind::kRejected;
  std::string reason;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  std::size_t count(ValidationIssue::Kind kind) const;
  bool empty() const { return issues.empty(); }
};

struct ParsedLog {
  std::vector<EngagementEvent> events;
  ValidationReport report;
};

/// Parses the JSONL event schema
///   {"q": str, "p": str, "src": "web"|"app", "day": "YYYY-MM-DD",
///    "examines": int, "clicks": int, "atcs": int, "orders": int}
/// Duplicate keys are summed, then any behavior count above `examines` is
/// clamped. In strict mode every rejection or clamp throws ParseError instead.
/// Blank lines are ignored.
ParsedLog parse_event_log(std::istream& in, bool strict);

/// Writes events as JSONL in the order given.
void write_event_log(std::ostream& out, std::span<const EngagementEvent> events);

/// Sorts canonically and sums duplicate keys. No cap check.
std::vector<EngagementEvent> merge_events(std::vector<EngagementEvent> events);

/// Events whose day lies inside `window`, preserving input order.
std::vector<EngagementEvent> slice_window(std::span<const EngagementEvent> events,
                                          const WindowSpec& window);

class VerticalLabelMap {
 public:
  VerticalLabelMap() = default;
  explicit VerticalLabelMap(const std::map<std::string, Vertical>& entries)
      : entries_(entries.begin(), entries.end()) {}

  void set(std::string query_id, Vertical vertical) {
    entries_[std::move(query_id)] = vertical;
  }
  bool contains(std::string_view query_id) const {
    return entries_.find(query_id) != entries_.end();
  }
  /// Throws ContractError naming the query when it has no label.
  Vertical at(std::string_view query_id) const;
  const std::map<std::string, Vertical, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, Vertical, std::less<>> entries_;
};

/// CSV with header `query_id,vertical`.
VerticalLabelMap read_vertical_labels(std::istream& in);
void write_vertical_labels(std::ostream& out, const VerticalLabelMap& labels);

}  // namespace ltrlab::events
