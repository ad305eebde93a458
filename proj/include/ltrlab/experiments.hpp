#pragma once

// Model variants, temporal train/label/test splits, team-draft interleaving,
// A/B tests, and the end-to-end directional reproduction.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ltrlab/event_log.hpp"
#include "ltrlab/feature_builder.hpp"
#include "ltrlab/gbdt.hpp"
#include "ltrlab/random.hpp"
#include "ltrlab/scenario_config.hpp"
#include "ltrlab/simulator.hpp"
#include "ltrlab/tree_analysis.hpp"

namespace ltrlab::exp {

using events::EngagementEvent;
using events::Vertical;
using events::VerticalLabelMap;
using features::QueryProduct;

enum class VariantName { kBaseline, kModelA, kModelB, kModelC };

inline constexpr std::array<VariantName, 4> kAllVariants{
    VariantName::kBaseline, VariantName::kModelA, VariantName::kModelB, VariantName::kModelC};

std::string_view to_string(VariantName name);
std::optional<VariantName> parse_variant(std::string_view text);

/// Feature-set definition: Baseline = {730}, ModelA = {30}, ModelB =
/// {730, 30}, ModelC = {730, 30} plus vertical one-hots.
struct ModelVariant {
  VariantName name = VariantName::kBaseline;
  std::vector<int> windows;
  bool include_verticals = false;

  static ModelVariant of(VariantName name);
  std::vector<std::string> feature_names() const;
};

inline constexpr int kLongWindowDays = 730;
inline constexpr int kShortWindowDays = 30;

/// Relevance grade from realized engagement: order 3, ATC 2, click 1, else 0.
int grade_from_counts(const events::Counts& counts);

/// Inclusive day range labels are read from.
struct LabelWindow {
  Day first_day{};
  int length_days = 7;

  Day last_day() const { return add_days(first_day, length_days - 1); }
  /// (reference_date, reference_date + length_days].
  static LabelWindow after(Day reference_date, int length_days = 7) {
    return {add_days(reference_date, 1), length_days};
  }
};

/// Features aggregated up to `reference_date`, grades from engagement inside
/// `label_window` summed over sources. Universe pairs are grouped by query in
/// first-appearance order; groups with fewer than two products are dropped.
/// Throws ContractError when the label window starts on or before the
/// reference date (it would overlap the feature windows).
ltr::RankingDataset assemble_variant_dataset(std::span<const EngagementEvent> events,
                                             const VerticalLabelMap& labels,
                                             const ModelVariant& variant, Day reference_date,
                                             std::span<const QueryProduct> universe,
                                             const LabelWindow& label_window,
                                             const features::BehaviorPriors& priors = {});

/// Restricts a dataset to the named columns, which must all exist.
ltr::RankingDataset project_dataset(const ltr::RankingDataset& dataset,
                                    std::span<const std::string> names);

enum class Team : std::uint8_t { kA, kB };

struct Interleaving {
  std::vector<std::size_t> ranking;
  std::vector<Team> teams;
};

/// Team-draft merge. Each round `a_first()` decides which team drafts
/// first; each team then takes its highest-ranked item not yet placed.
/// Throws ContractError when the rankings are not permutations of the same
/// candidate set.
template <typename CoinFn>
Interleaving team_draft_interleave(std::span<const std::size_t> ranking_a,
                                   std::span<const std::size_t> ranking_b, CoinFn&& a_first);

Interleaving team_draft_interleave(std::span<const std::size_t> ranking_a,
                                   std::span<const std::size_t> ranking_b, Rng& rng);

/// How a session counts as "a search with engagement" for a side.
enum class CreditRule {
  kTeam,    // exactly one team's drafted items engaged; ties credit neither
  kPerArm,  // each team whose drafted items engaged, ties credit both
};

std::string_view to_string(CreditRule rule);

struct InterleavingRow {
  std::string segment;  // vertical name or "Overall"
  std::int64_t sessions = 0;
  std::int64_t control_credit = 0;
  std::int64_t variant_credit = 0;
  double delta = 0.0;  // (variant - control) / control
  double z = 0.0;
  bool significant = false;
};

struct InterleavingReport {
  CreditRule rule = CreditRule::kTeam;
  bool bootstrap = false;
  std::vector<InterleavingRow> rows;  // six verticals in enum order, then Overall

  const InterleavingRow& overall() const { return rows.back(); }
  const InterleavingRow& at(Vertical v) const { return rows[static_cast<std::size_t>(v)]; }

  /// CSV `vertical,delta,significant,n`.
  void write_csv(std::ostream& out) const;
  void write_text(std::ostream& out, std::string_view title) const;
};

struct TestOptions {
  CreditRule credit = CreditRule::kTeam;
  double alpha = 0.10;
  bool bootstrap = false;
  int bootstrap_samples = 500;
};

/// A fixed ranking (world product indices) per query, served for the whole
/// test period.
using QueryRankings = std::vector<std::vector<std::size_t>>;

/// Feature snapshot at `serve_day` scored by `model`: candidates that exist
/// on serve_day, sorted by score with catalog order breaking ties.
QueryRankings rank_with_model(const ltr::GbdtModel& model, const sim::World& world,
                              std::span<const EngagementEvent> events, int serve_day,
                              const features::BehaviorPriors& priors);

/// Test-period window: days [first_day, first_day + num_days).
struct TestPeriod {
  int first_day = 0;
  int num_days = 1;
  int sessions_per_day = 100;  // per query per day
};

/// Every session interleaves the two rankings of its query, simulates the
/// user on the merged list with the day's true affinities, and credits teams
/// per `options.credit`. Deltas are relative changes of the variant's
/// credited share over the control's; significance is a two-sided test at
/// options.alpha. Throws ContractError on zero sessions.
InterleavingReport run_interleaving_test(const sim::World& world, const QueryRankings& control,
                                         const QueryRankings& variant, const TestPeriod& period,
                                         std::uint64_t seed, const TestOptions& options = {});

struct AbMetric {
  std::string name;
  double control = 0.0;
  double variant = 0.0;
  double lift = 0.0;  // (variant - control) / control
  std::int64_t control_n = 0;
  std::int64_t variant_n = 0;
  double z = 0.0;
  bool significant = false;
};

struct AbReport {
  AbMetric atc_at_10;          // share of ATC events at positions 1..10
  AbMetric sessions_with_atc;  // share of sessions with >= 1 ATC
  AbMetric abandonment;        // share of sessions with no engagement
  std::int64_t control_sessions = 0;
  std::int64_t variant_sessions = 0;

  /// CSV `metric,control,variant,lift,significant`.
  void write_csv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

/// Sessions split 50/50 between arms by a per-session coin.
AbReport run_ab_test(const sim::World& world, const QueryRankings& control,
                     const QueryRankings& variant, const TestPeriod& period, std::uint64_t seed,
                     double alpha = 0.10);

/// Timeline and training settings for one reproduction run. Snapshot k uses
/// features up to day D - k * snapshot_stride and labels from the following
/// label_days days; models serve from day D + label_days and are tested on
/// the test_days after that.
struct ExperimentConfig {
  int feature_reference_day = 790;
  int label_days = 7;
  int train_snapshots = 16;
  int snapshot_stride = 7;
  int test_days = 14;
  int test_sessions_per_day = 500;
  ltr::TrainParams train{.min_samples_leaf = 100};
  features::BehaviorPriors priors;
  TestOptions test;

  int serve_day() const { return feature_reference_day + label_days; }
  int last_log_day() const { return serve_day(); }
  TestPeriod test_period() const {
    return {serve_day() + 1, test_days, test_sessions_per_day};
  }
  void validate(const sim::ScenarioConfig& scenario) const;
};

ExperimentConfig experiment_from_config(const KeyValueConfig& config);
void write_experiment_config(std::ostream& out, const ExperimentConfig& config);

/// Training groups for every snapshot, query ids suffixed `@<date>`.
ltr::RankingDataset assemble_training_set(const sim::World& world,
                                          std::span<const EngagementEvent> events,
                                          const ModelVariant& variant,
                                          const ExperimentConfig& config);

struct VariantModel {
  ModelVariant variant;
  ltr::GbdtModel model;
  ltr::TrainingLog log;
};

struct ReproSummary {
  std::uint64_t seed = 0;
  std::vector<VariantModel> models;  // Baseline, ModelA, ModelB, ModelC
  InterleavingReport a_vs_baseline;
  InterleavingReport b_vs_baseline;
  InterleavingReport c_vs_baseline;
  AbReport c_ab;
  trees::NodeAdjacencyReport c_tree;  // vertical parents, behavioral children

  const VariantModel& model(VariantName name) const;

  /// Share of 30-day (or 730-day) children under a vertical's split nodes in
  /// Model C.
  double window_share(Vertical vertical, int window_days) const;

  /// CSV `test,vertical,delta,significant,n` for the three interleaving tests.
  void write_directional_csv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

/// Event log of days [0, last_day] under the noisy-affinity logging ranker,
/// with the traffic stream derived from `seed`.
std::vector<EngagementEvent> simulate_log(const sim::World& world, int last_day,
                                          std::uint64_t seed, int threads = 1);

/// Generates the world and log, trains all four variants, runs the three
/// interleaving tests against Baseline, the Model C A/B test and the Model C
/// tree analysis. Deterministic in (scenario, config, seed).
ReproSummary repro_paper_scenario(const sim::ScenarioConfig& scenario,
                                  const ExperimentConfig& config, std::uint64_t seed,
                                  int threads = 1);

/// As above but on an already generated world and log.
ReproSummary repro_on_world(const sim::World& world, std::span<const EngagementEvent> events,
                            const ExperimentConfig& config, std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------------------

namespace detail {
void check_same_candidates(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Team draft without the candidate-set check.
template <typename CoinFn>
Interleaving team_draft(std::span<const std::size_t> ranking_a,
                        std::span<const std::size_t> ranking_b, CoinFn&& a_first) {
  const std::size_t n = ranking_a.size();
  std::size_t max_id = 0;
  for (auto id : ranking_a) max_id = std::max(max_id, id);
  std::vector<std::uint8_t> placed(n == 0 ? 0 : max_id + 1, 0);
  Interleaving out;
  out.ranking.reserve(n);
  out.teams.reserve(n);
  std::size_t next_a = 0;
  std::size_t next_b = 0;
  auto draft = [&](std::span<const std::size_t> ranking, std::size_t& cursor, Team team) {
    while (cursor < ranking.size() && placed[ranking[cursor]]) ++cursor;
    if (cursor == ranking.size()) return;
    placed[ranking[cursor]] = 1;
    out.ranking.push_back(ranking[cursor]);
    out.teams.push_back(team);
  };
  while (out.ranking.size() < n) {
    if (a_first()) {
      draft(ranking_a, next_a, Team::kA);
      draft(ranking_b, next_b, Team::kB);
    } else {
      draft(ranking_b, next_b, Team::kB);
      draft(ranking_a, next_a, Team::kA);
    }
  }
  return out;
}

}  // namespace detail

template <typename CoinFn>
Interleaving team_draft_interleave(std::span<const std::size_t> ranking_a,
                                   std::span<const std::size_t> ranking_b, CoinFn&& a_first) {
  detail::check_same_candidates(ranking_a, ranking_b);
  return detail::team_draft(ranking_a, ranking_b, std::forward<CoinFn>(a_first));
}

}  // namespace ltrlab::exp
