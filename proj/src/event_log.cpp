#include "ltrlab/event_log.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "ltrlab/error.hpp"

namespace ltrlab::events {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kNumVerticals> kVerticalNames{
    "Food", "Consumables", "Home", "Hardlines", "Fashion", "ETS"};

std::string key_string(const EngagementEvent& e) {
  return "(" + e.query_id + ", " + e.product_id + ", " + std::string(to_string(e.source)) +
         ", " + format_day(e.day) + ")";
}

// Returns an error message, or empty when the line is well-formed.
std::string parse_line(const std::string& line, EngagementEvent& out) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    return "not a JSON object";
  }
  if (!j.is_object()) return "not a JSON object";

  for (const char* field : {"q", "p", "src", "day"}) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string()) {
      return std::string("missing or non-string field '") + field + "'";
    }
  }
  out.query_id = j["q"].get<std::string>();
  out.product_id = j["p"].get<std::string>();
  const auto src = parse_source(j["src"].get<std::string>());
  if (!src) return "unknown source '" + j["src"].get<std::string>() + "'";
  out.source = *src;
  try {
    out.day = parse_day(j["day"].get<std::string>());
  } catch (const ParseError& err) {
    return err.what();
  }

  const std::array<std::pair<const char*, std::int64_t*>, 4> count_fields{{
      {"examines", &out.counts.examines},
      {"clicks", &out.counts.clicks},
      {"atcs", &out.counts.atcs},
      {"orders", &out.counts.orders},
  }};
  for (const auto& [name, slot] : count_fields) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_number_integer()) {
      return std::string("missing or non-integer count '") + name + "'";
    }
    const auto value = it->get<std::int64_t>();
    if (value < 0) return std::string("negative count '") + name + "'";
    *slot = value;
  }
  return {};
}

bool same_key(const EngagementEvent& a, const EngagementEvent& b) {
  return a.query_id == b.query_id && a.product_id == b.product_id && a.source == b.source &&
         a.day == b.day;
}

}  // namespace

std::string_view to_string(Source source) { return source == Source::kWeb ? "web" : "app"; }

std::optional<Source> parse_source(std::string_view text) {
  if (text == "web") return Source::kWeb;
  if (text == "app") return Source::kApp;
  return std::nullopt;
}

std::string_view to_string(Vertical vertical) {
  return kVerticalNames[static_cast<std::size_t>(vertical)];
}

std::optional<Vertical> parse_vertical(std::string_view text) {
  for (std::size_t i = 0; i < kNumVerticals; ++i) {
    if (kVerticalNames[i] == text) return kAllVerticals[i];
  }
  return std::nullopt;
}

bool event_key_less(const EngagementEvent& a, const EngagementEvent& b) {
  return std::tie(a.query_id, a.product_id, a.source, a.day) <
         std::tie(b.query_id, b.product_id, b.source, b.day);
}

std::size_t ValidationReport::count(ValidationIssue::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [kind](const auto& issue) { return issue.kind == kind; }));
}

std::vector<EngagementEvent> merge_events(std::vector<EngagementEvent> events) {
  std::stable_sort(events.begin(), events.end(), event_key_less);
  std::vector<EngagementEvent> merged;
  merged.reserve(events.size());
  for (auto& e : events) {
    if (!merged.empty() && same_key(merged.back(), e)) {
      merged.back().counts += e.counts;
    } else {
      merged.push_back(std::move(e));
    }
  }
  return merged;
}

ParsedLog parse_event_log(std::istream& in, bool strict) {
  ParsedLog result;
  // Line numbers ride along so clamp warnings can point at the input.
  std::vector<std::pair<EngagementEvent, std::size_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    EngagementEvent event;
    const std::string error = parse_line(line, event);
    if (!error.empty()) {
      if (strict) {
        throw ParseError("line " + std::to_string(line_no) + ": " + error);
      }
      result.report.issues.push_back(
          {line_no, ValidationIssue::Kind::kRejected, error});
      continue;
    }
    raw.emplace_back(std::move(event), line_no);
  }

  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
    return event_key_less(a.first, b.first);
  });

  std::vector<std::size_t> first_lines;
  for (auto& [event, no] : raw) {
    if (!result.events.empty() && same_key(result.events.back(), event)) {
      result.events.back().counts += event.counts;
      first_lines.back() = std::min(first_lines.back(), no);
    } else {
      result.events.push_back(std::move(event));
      first_lines.push_back(no);
    }
  }

  for (std::size_t i = 0; i < result.events.size(); ++i) {
    auto& e = result.events[i];
    std::string clamped;
    for (auto [name, slot] : {std::pair{"clicks", &e.counts.clicks},
                              std::pair{"atcs", &e.counts.atcs},
                              std::pair{"orders", &e.counts.orders}}) {
      if (*slot > e.counts.examines) {
        if (strict) {
          throw ParseError("line " + std::to_string(first_lines[i]) + ": " + name +
                           " exceeds examines for " + key_string(e));
        }
        clamped += (clamped.empty() ? "" : ", ") + std::string(name) + " " +
                   std::to_string(*slot) + "->" + std::to_string(e.counts.examines);
        *slot = e.counts.examines;
      }
    }
    if (!clamped.empty()) {
      result.report.issues.push_back({first_lines[i], ValidationIssue::Kind::kClamped,
                                      "clamped to examines for " + key_string(e) + ": " +
                                          clamped});
    }
  }
  return result;
}

void write_event_log(std::ostream& out, std::span<const EngagementEvent> events) {
  for (const auto& e : events) {
    out << "{\"q\":" << json(e.query_id).dump() << ",\"p\":" << json(e.product_id).dump()
        << ",\"src\":\"" << to_string(e.source) << "\",\"day\":\"" << format_day(e.day)
        << "\",\"examines\":" << e.counts.examines << ",\"clicks\":" << e.counts.clicks
        << ",\"atcs\":" << e.counts.atcs << ",\"orders\":" << e.counts.orders << "}\n";
  }
}

std::vector<EngagementEvent> slice_window(std::span<const EngagementEvent> events,
                                          const WindowSpec& window) {
  std::vector<EngagementEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const EngagementEvent& e) { return window.contains(e.day); });
  return out;
}

Vertical VerticalLabelMap::at(std::string_view query_id) const {
  auto it = entries_.find(query_id);
  if (it == entries_.end()) {
    throw ContractError("query '" + std::string(query_id) + "' has no vertical label");
  }
  return it->second;
}

VerticalLabelMap read_vertical_labels(std::istream& in) {
  VerticalLabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "query_id,vertical") {
        throw ParseError("vertical labels: expected header 'query_id,vertical'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw ParseError("vertical labels line " + std::to_string(line_no) + ": malformed row");
    }
    const auto vertical = parse_vertical(std::string_view(line).substr(comma + 1));
    if (!vertical) {
      throw ParseError("vertical labels line " + std::to_string(line_no) +
                       ": unknown vertical '" + line.substr(comma + 1) + "'");
    }
    std::string query = line.substr(0, comma);
    if (labels.contains(query) && labels.at(query) != *vertical) {
      throw ParseError("vertical labels line " + std::to_string(line_no) + ": query '" +
                       query + "' has conflicting labels");
    }
    labels.set(std::move(query), *vertical);
  }
  if (!header_seen) throw ParseError("vertical labels: empty file");
  return labels;
}

void write_vertical_labels(std::ostream& out, const VerticalLabelMap& labels) {
  out << "query_id,vertical\n";
  for (const auto& [query, vertical] : labels.entries()) {
    out << query << ',' << to_string(vertical) << '\n';
  }
}

}  // namespace ltrlab::events
