#pragma once

// Beta-Binomial smoothed engagement rates over lookback windows, their
// incremental maintenance, and full feature vectors with vertical one-hots.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ltrlab/event_log.hpp"

namespace ltrlab::features {

using events::Counts;
using events::EngagementEvent;
using events::Source;
using events::Vertical;
using events::VerticalLabelMap;
using events::WindowSpec;

enum class Behavior : std::uint8_t { kClick, kAtc, kOrder };

inline constexpr std::array<Behavior, 3> kAllBehaviors{Behavior::kClick, Behavior::kAtc,
                                                       Behavior::kOrder};

/// Short names used in feature columns: cr, ar, or.
std::string_view to_string(Behavior behavior);

/// The behavior's numerator inside a Counts tuple.
std::int64_t successes(const Counts& counts, Behavior behavior);

/// Beta(alpha, beta) prior; both parameters must be positive.
struct PriorSpec {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
  double mean() const { return alpha / (alpha + beta); }
};

struct BehaviorPriors {
  PriorSpec click{1.0, 19.0};
  PriorSpec atc{1.0, 49.0};
  PriorSpec order{1.0, 99.0};

  const PriorSpec& operator[](Behavior behavior) const;
  static BehaviorPriors uniform(PriorSpec prior) { return {prior, prior, prior}; }
};

/// One behavioral column, rendered `<source>_<window_days>_<behavior>`,
/// e.g. `app_30_cr`.
struct FeatureKey {
  Source source = Source::kWeb;
  int window_days = 0;
  Behavior behavior = Behavior::kClick;

  std::string name() const;
  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

std::optional<FeatureKey> parse_feature_key(std::string_view name);

/// Column name of a vertical indicator, e.g. `vertical_Fashion`.
std::string vertical_feature_name(Vertical vertical);
std::optional<Vertical> parse_vertical_feature(std::string_view name);

/// Posterior mean of Beta(b + alpha, e - b + beta):
/// (b_sum + alpha) / (e_sum + alpha + beta).
/// Throws ContractError when b_sum > e_sum or either sum is negative.
double smoothed_rate(std::int64_t b_sum, std::int64_t e_sum, const PriorSpec& prior);

/// (query_id, product_id, source); the unit over which counts are summed.
struct CountKey {
  std::string query_id;
  std::string product_id;
  Source source = Source::kWeb;

  friend auto operator<=>(const CountKey&, const CountKey&) = default;
};

using CountMap = std::map<CountKey, Counts>;

/// Exact integer sums of each key's daily counts inside `window`.
CountMap aggregate_counts(std::span<const EngagementEvent> events, const WindowSpec& window);

using QueryProduct = std::pair<std::string, std::string>;

struct FeatureVector {
  std::string query_id;
  std::string product_id;
  std::map<FeatureKey, double> behavioral;
  std::array<std::uint8_t, events::kNumVerticals> vertical_onehot{};
};

/// One vector per universe pair, with |windows| x 2 sources x 3 behaviors
/// behavioral values. Pairs without events in a window get the prior mean.
/// All windows must share one reference date. Throws ContractError on an
/// unlabeled query or an empty/inconsistent window list.
std::vector<FeatureVector> build_feature_matrix(std::span<const EngagementEvent> events,
                                                std::span<const WindowSpec> windows,
                                                const BehaviorPriors& priors,
                                                const VerticalLabelMap& labels,
                                                std::span<const QueryProduct> universe);

/// Sorted column names for a window set, optionally with the six vertical
/// indicators. Sorting fixes the dense column order everywhere.
std::vector<std::string> feature_names(std::span<const int> window_days, bool include_verticals);

/// Projects a feature vector onto named columns. Throws ContractError on a
/// name the vector does not carry.
std::vector<double> to_dense(const FeatureVector& vector, std::span<const std::string> names);

/// Sliding-window sums per CountKey, kept in a ring buffer of daily counts so
/// the reference date can advance one day at a time.
class RollingAggregate {
 public:
  RollingAggregate(int length_days, Day reference_date);

  /// Builds the aggregate for `window` from a full event log.
  static RollingAggregate from_events(std::span<const EngagementEvent> events,
                                      const WindowSpec& window);

  /// Moves the window forward one day: the oldest day's counts leave the
  /// sums, `new_day_events` enter. Every event must be dated
  /// reference_date + 1, otherwise ContractError and no state change.
  void advance_day(std::span<const EngagementEvent> new_day_events);

  WindowSpec window() const { return {length_days_, reference_date_}; }

  /// Same shape as aggregate_counts over window(): keys with at least one
  /// event day inside the window.
  CountMap sums() const;

  /// Running sums equal ring contents and are non-negative.
  bool check_invariants() const;

 private:
  struct Series {
    std::vector<Counts> ring;
    std::vector<std::uint8_t> present;
    Counts sum;
    int present_days = 0;
  };

  std::size_t slot(Day day) const;
  void add(const EngagementEvent& event);

  int length_days_;
  Day reference_date_;
  std::map<CountKey, Series> series_;
};

/// Functional form of RollingAggregate::advance_day.
RollingAggregate advance_day(RollingAggregate aggregate,
                             std::span<const EngagementEvent> new_day_events);

}  // namespace ltrlab::features
