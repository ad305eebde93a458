#include "ltrlab/feature_builder.hpp"

#include <algorithm>
#include <charconv>

#include "ltrlab/error.hpp"

namespace ltrlab::features {

namespace {

bool same_count_key(const EngagementEvent& e, const CountKey& key) {
  return e.source == key.source && e.product_id == key.product_id && e.query_id == key.query_id;
}

}  // namespace

std::string_view to_string(Behavior behavior) {
  switch (behavior) {
    case Behavior::kClick:
      return "cr";
    case Behavior::kAtc:
      return "ar";
    case Behavior::kOrder:
      return "or";
  }
  return "?";
}

std::int64_t successes(const Counts& counts, Behavior behavior) {
  switch (behavior) {
    case Behavior::kClick:
      return counts.clicks;
    case Behavior::kAtc:
      return counts.atcs;
    case Behavior::kOrder:
      return counts.orders;
  }
  return 0;
}

void PriorSpec::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ContractError("Beta prior needs alpha > 0 and beta > 0");
  }
}

const PriorSpec& BehaviorPriors::operator[](Behavior behavior) const {
  switch (behavior) {
    case Behavior::kClick:
      return click;
    case Behavior::kAtc:
      return atc;
    case Behavior::kOrder:
      return order;
  }
  return click;
}

std::string FeatureKey::name() const {
  return std::string(events::to_string(source)) + "_" + std::to_string(window_days) + "_" +
         std::string(to_string(behavior));
}

std::optional<FeatureKey> parse_feature_key(std::string_view name) {
  const auto first = name.find('_');
  const auto last = name.rfind('_');
  if (first == std::string_view::npos || first == last) return std::nullopt;
  const auto source = events::parse_source(name.substr(0, first));
  if (!source) return std::nullopt;
  const auto days_text = name.substr(first + 1, last - first - 1);
  int days = 0;
  auto [ptr, ec] = std::from_chars(days_text.data(), days_text.data() + days_text.size(), days);
  if (ec != std::errc{} || ptr != days_text.data() + days_text.size() || days < 1) {
    return std::nullopt;
  }
  const auto behavior_text = name.substr(last + 1);
  for (Behavior b : kAllBehaviors) {
    if (to_string(b) == behavior_text) return FeatureKey{*source, days, b};
  }
  return std::nullopt;
}

std::string vertical_feature_name(Vertical vertical) {
  return "vertical_" + std::string(events::to_string(vertical));
}

std::optional<Vertical> parse_vertical_feature(std::string_view name) {
  constexpr std::string_view prefix = "vertical_";
  if (!name.starts_with(prefix)) return std::nullopt;
  return events::parse_vertical(name.substr(prefix.size()));
}

double smoothed_rate(std::int64_t b_sum, std::int64_t e_sum, const PriorSpec& prior) {
  if (b_sum < 0 || e_sum < 0) throw ContractError("smoothed_rate: negative count");
  if (b_sum > e_sum) {
    throw ContractError("smoothed_rate: successes " + std::to_string(b_sum) +
                        " exceed trials " + std::to_string(e_sum));
  }
  prior.validate();
  return (static_cast<double>(b_sum) + prior.alpha) /
         (static_cast<double>(e_sum) + prior.alpha + prior.beta);
}

CountMap aggregate_counts(std::span<const EngagementEvent> events, const WindowSpec& window) {
  CountMap sums;
  Counts* current = nullptr;
  const CountKey* current_key = nullptr;
  for (const auto& e : events) {
    if (!window.contains(e.day)) continue;
    // Canonically sorted input hits the same key run after run, so the map
    // lookup happens once per key instead of once per event.
    if (current == nullptr || !same_count_key(e, *current_key)) {
      auto [it, inserted] =
          sums.try_emplace(CountKey{e.query_id, e.product_id, e.source}, Counts{});
      current = &it->second;
      current_key = &it->first;
    }
    *current += e.counts;
  }
  return sums;
}

std::vector<FeatureVector> build_feature_matrix(std::span<const EngagementEvent> events,
                                                std::span<const WindowSpec> windows,
                                                const BehaviorPriors& priors,
                                                const VerticalLabelMap& labels,
                                                std::span<const QueryProduct> universe) {
  if (windows.empty()) throw ContractError("build_feature_matrix: no windows");
  for (const auto& w : windows) {
    if (w.length_days < 1) throw ContractError("window length must be >= 1 day");
    if (w.reference_date != windows.front().reference_date) {
      throw ContractError("build_feature_matrix: windows must share one reference date");
    }
  }
  for (Behavior b : kAllBehaviors) priors[b].validate();
  for (const auto& [query, product] : universe) labels.at(query);

  std::vector<CountMap> per_window;
  per_window.reserve(windows.size());
  for (const auto& w : windows) per_window.push_back(aggregate_counts(events, w));

  std::vector<FeatureVector> out;
  out.reserve(universe.size());
  CountKey key;
  for (const auto& [query, product] : universe) {
    FeatureVector fv;
    fv.query_id = query;
    fv.product_id = product;
    fv.vertical_onehot[static_cast<std::size_t>(labels.at(query))] = 1;
    key.query_id = query;
    key.product_id = product;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      for (Source source : events::kAllSources) {
        key.source = source;
        auto it = per_window[w].find(key);
        const Counts counts = it == per_window[w].end() ? Counts{} : it->second;
        for (Behavior b : kAllBehaviors) {
          fv.behavioral[FeatureKey{source, windows[w].length_days, b}] =
              smoothed_rate(successes(counts, b), counts.examines, priors[b]);
        }
      }
    }
    out.push_back(std::move(fv));
  }
  return out;
}

std::vector<std::string> feature_names(std::span<const int> window_days, bool include_verticals) {
  std::vector<std::string> names;
  for (int days : window_days) {
    for (Source s : events::kAllSources) {
      for (Behavior b : kAllBehaviors) names.push_back(FeatureKey{s, days, b}.name());
    }
  }
  if (include_verticals) {
    for (Vertical v : events::kAllVerticals) names.push_back(vertical_feature_name(v));
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::vector<double> to_dense(const FeatureVector& vector, std::span<const std::string> names) {
  std::vector<double> row;
  row.reserve(names.size());
  for (const auto& name : names) {
    if (auto key = parse_feature_key(name)) {
      auto it = vector.behavioral.find(*key);
      if (it == vector.behavioral.end()) {
        throw ContractError("feature vector has no column '" + name + "'");
      }
      row.push_back(it->second);
    } else if (auto vertical = parse_vertical_feature(name)) {
      row.push_back(vector.vertical_onehot[static_cast<std::size_t>(*vertical)]);
    } else {
      throw ContractError("unknown feature name '" + name + "'");
    }
  }
  return row;
}

RollingAggregate::RollingAggregate(int length_days, Day reference_date)
    : length_days_(length_days), reference_date_(reference_date) {
  if (length_days < 1) throw ContractError("window length must be >= 1 day");
}

std::size_t RollingAggregate::slot(Day day) const {
  const auto n = static_cast<long long>(day.time_since_epoch().count());
  const auto len = static_cast<long long>(length_days_);
  return static_cast<std::size_t>(((n % len) + len) % len);
}

void RollingAggregate::add(const EngagementEvent& event) {
  auto [it, inserted] = series_.try_emplace(
      CountKey{event.query_id, event.product_id, event.source}, Series{});
  Series& s = it->second;
  if (inserted) {
    s.ring.assign(static_cast<std::size_t>(length_days_), Counts{});
    s.present.assign(static_cast<std::size_t>(length_days_), 0);
  }
  const std::size_t i = slot(event.day);
  s.ring[i] += event.counts;
  s.sum += event.counts;
  if (!s.present[i]) {
    s.present[i] = 1;
    ++s.present_days;
  }
}

RollingAggregate RollingAggregate::from_events(std::span<const EngagementEvent> events,
                                               const WindowSpec& window) {
  RollingAggregate agg(window.length_days, window.reference_date);
  for (const auto& e : events) {
    if (window.contains(e.day)) agg.add(e);
  }
  return agg;
}

void RollingAggregate::advance_day(std::span<const EngagementEvent> new_day_events) {
  const Day next = add_days(reference_date_, 1);
  for (const auto& e : new_day_events) {
    if (e.day != next) {
      throw ContractError("advance_day: event dated " + format_day(e.day) + ", expected " +
                          format_day(next));
    }
  }
  // The slot that `next` maps to holds the day falling out of the window.
  const std::size_t evicted = slot(next);
  for (auto it = series_.begin(); it != series_.end();) {
    Series& s = it->second;
    if (s.present[evicted]) {
      s.sum -= s.ring[evicted];
      s.ring[evicted] = Counts{};
      s.present[evicted] = 0;
      --s.present_days;
    }
    it = s.present_days == 0 ? series_.erase(it) : std::next(it);
  }
  reference_date_ = next;
  for (const auto& e : new_day_events) add(e);
}

CountMap RollingAggregate::sums() const {
  CountMap out;
  for (const auto& [key, s] : series_) out.emplace_hint(out.end(), key, s.sum);
  return out;
}

bool RollingAggregate::check_invariants() const {
  for (const auto& [key, s] : series_) {
    Counts total;
    int present = 0;
    for (std::size_t i = 0; i < s.ring.size(); ++i) {
      total += s.ring[i];
      present += s.present[i];
    }
    if (total != s.sum || present != s.present_days) return false;
    if (s.sum.examines < 0 || s.sum.clicks < 0 || s.sum.atcs < 0 || s.sum.orders < 0) {
      return false;
    }
  }
  return true;
}

RollingAggregate advance_day(RollingAggregate aggregate,
                             std::span<const EngagementEvent> new_day_events) {
  aggregate.advance_day(new_day_events);
  return aggregate;
}

}  // namespace ltrlab::features
