#pragma once

// Synthetic catalogs with drifting engagement propensities, a position-biased
// user model, and daily event-log generation under a logging ranker.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltrlab/event_log.hpp"
#include "ltrlab/random.hpp"
#include "ltrlab/scenario_config.hpp"

namespace ltrlab::sim {

/// Absolute funnel propensities, order <= atc <= click.
struct Propensities {
  double click = 0.0;
  double atc = 0.0;
  double order = 0.0;
};

struct Product {
  std::string id;
  int arrival_day = 0;
};

struct QueryInfo {
  std::string id;
  events::Vertical vertical = events::Vertical::kFood;
  std::vector<Product> products;
};

/// A generated catalog plus the full trajectory of true affinities. Days are
/// indices from config().start_date.
class World {
 public:
  const ScenarioConfig& config() const { return config_; }
  const std::vector<QueryInfo>& queries() const { return queries_; }
  int horizon() const { return config_.horizon_days; }
  Day date(int day) const { return add_days(config_.start_date, day); }
  int day_index(Day date) const { return days_between(config_.start_date, date); }

  /// True propensities of product p of query q on `day`; the product must
  /// have arrived by then.
  Propensities affinity(std::size_t q, std::size_t p, int day) const;
  /// Click-propensity logit, the logging ranker's sort key.
  double click_logit(std::size_t q, std::size_t p, int day) const;

  /// Products of query q that exist on `day`, in catalog order.
  std::vector<std::size_t> candidates(std::size_t q, int day) const;

  events::VerticalLabelMap labels() const;

  /// CSV `query_id,product_id,vertical,arrival_date,date,click,atc,order`
  /// for every product present on `day`.
  void write_snapshot_csv(std::ostream& out, int day) const;

 private:
  friend World generate_world(const ScenarioConfig& config);

  struct Trajectory {
    // Logits indexed by (day - arrival_day).
    std::vector<double> click;
    std::vector<double> atc_given_click;
    std::vector<double> order_given_atc;
  };

  ScenarioConfig config_;
  std::vector<QueryInfo> queries_;
  std::vector<std::vector<Trajectory>> trajectories_;
};

/// Deterministic in config.seed. Queries are spread evenly over the six
/// verticals; each starts with products_per_query products on day 0 and
/// gains arrivals at the vertical's new_product_rate. Each propensity logit
/// follows a Gaussian random walk with the vertical's drift_rate step.
/// Throws ConfigError on an invalid config.
World generate_world(const ScenarioConfig& config);

struct PositionOutcome {
  bool examined = false;
  bool clicked = false;
  bool atc = false;
  bool ordered = false;
};

struct SimulatedSession {
  std::string query_id;
  Day day{};
  std::vector<std::string> shown;
  std::vector<PositionOutcome> outcomes;

  bool any_engagement() const;
  bool any_atc() const;
};

/// Outcomes for a ranked list with aligned propensities: examination by
/// position, then click, ATC given click, order given ATC.
std::vector<PositionOutcome> simulate_outcomes(std::span<const Propensities> ranked,
                                               const UserModel& user, Rng& rng);

SimulatedSession simulate_session(std::string_view query_id, Day day,
                                  std::span<const std::string> ranking,
                                  std::span<const Propensities> affinity, const UserModel& user,
                                  Rng& rng);

/// Orders the candidate products of query q on `day` for one session.
using Ranker =
    std::function<std::vector<std::size_t>(std::size_t query, int day, Rng& rng)>;

/// Ranks candidates by click logit plus N(0, noise^2), redrawn per session.
Ranker noisy_affinity_ranker(const World& world, double noise);

/// Daily per-(query, product, source) sums of simulated sessions over days
/// [first_day, last_day], canonically sorted. Web and app traffic use
/// independent session streams derived from `seed`; a product appears on a
/// day only if it was examined.
std::vector<events::EngagementEvent> generate_event_log(const World& world, const Ranker& ranker,
                                                        int first_day, int last_day,
                                                        std::uint64_t seed, int threads = 1);

}  // namespace ltrlab::sim
