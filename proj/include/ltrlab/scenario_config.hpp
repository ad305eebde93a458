#pragma once

// Flat TOML-style `key = value` files with optional [section] headers, and
// the simulator's scenario definition.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>

#include "ltrlab/date.hpp"
#include "ltrlab/event_log.hpp"

namespace ltrlab {

/// Keys inside `[a.b]` become `a.b.key`. Values may be bare or double-quoted.
/// Getters record which keys were read so typos surface in require_all_used().
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  /// Throws ConfigError when the file cannot be opened or parsed.
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming every key no getter asked for.
  void require_all_used() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

namespace sim {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-vertical dynamics. Propensities are drawn uniformly from the click
/// range and from the conditional ATC-given-click and order-given-ATC ranges.
struct VerticalDynamics {
  double drift_rate = 0.0;        // logit random-walk step sd per day
  double new_product_rate = 0.0;  // expected arrivals per query per day
  Range click{0.02, 0.30};
  Range atc_given_click{0.10, 0.50};
  Range order_given_atc{0.20, 0.60};
};

/// Position-biased examination: rank r (1-based) is examined with
/// probability 1/log2(r + 1) when r <= page_length, never otherwise.
struct UserModel {
  int page_length = 20;

  double examination(int rank) const;
};

struct ScenarioConfig {
  int queries_per_vertical = 8;
  int products_per_query = 20;
  int horizon_days = 830;
  Day start_date = parse_day("2022-01-01");
  std::array<VerticalDynamics, events::kNumVerticals> verticals{};
  UserModel user;
  int web_sessions_per_day = 3;  // per query per day
  int app_sessions_per_day = 3;
  double logging_noise = 1.0;  // sd of the logging ranker's logit noise
  std::uint64_t seed = 1;

  VerticalDynamics& dynamics(events::Vertical v) { return verticals[static_cast<std::size_t>(v)]; }
  const VerticalDynamics& dynamics(events::Vertical v) const {
    return verticals[static_cast<std::size_t>(v)];
  }

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// Stable Food/Consumables (no drift, rare arrivals) against drifting
  /// general-merchandise verticals with frequent arrivals.
  static ScenarioConfig standard();
};

/// Reads scenario keys; absent keys keep the standard() values.
ScenarioConfig scenario_from_config(const KeyValueConfig& config);

/// Writes every scenario key so the file round-trips through
/// scenario_from_config.
void write_scenario_config(std::ostream& out, const ScenarioConfig& config);

}  // namespace sim
}  // namespace ltrlab
