#include "ltrlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <boost/random/binomial_distribution.hpp>

#include "ltrlab/error.hpp"
#include "ltrlab/parallel.hpp"
#include "ltrlab/ranking_metrics.hpp"
#include "ltrlab/stats.hpp"
#include "ltrlab/svmlight.hpp"

namespace ltrlab::exp {

namespace {

constexpr std::uint64_t kLogStream = 0x4c4f47;          // "LOG"
constexpr std::uint64_t kInterleaveStream = 0x494e54;   // "INT"
constexpr std::uint64_t kAbStream = 0x4142;             // "AB"
constexpr std::uint64_t kBootstrapStream = 0x424f4f54;  // "BOOT"
constexpr std::uint64_t kTestStream = 0x54455354;       // "TEST"

constexpr std::size_t kOverall = events::kNumVerticals;
constexpr int kAtcTopPositions = 10;

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", 100.0 * x);
  return buf;
}

// Per-segment session tallies for an interleaving test.
struct CreditCounts {
  std::int64_t sessions = 0;
  std::int64_t control_only = 0;
  std::int64_t variant_only = 0;
  std::int64_t both = 0;

  CreditCounts& operator+=(const CreditCounts& o) {
    sessions += o.sessions;
    control_only += o.control_only;
    variant_only += o.variant_only;
    both += o.both;
    return *this;
  }
};

std::pair<std::int64_t, std::int64_t> credits(const CreditCounts& c, CreditRule rule) {
  if (rule == CreditRule::kTeam) return {c.control_only, c.variant_only};
  return {c.control_only + c.both, c.variant_only + c.both};
}

// Percentile bootstrap over sessions: resampling n sessions with replacement
// is a multinomial draw over the four session categories.
bool bootstrap_significant(const CreditCounts& c, CreditRule rule, double alpha, int samples,
                           Rng& rng) {
  if (c.sessions == 0) return false;
  const auto n = c.sessions;
  const double pc = static_cast<double>(c.control_only) / static_cast<double>(n);
  const double pv = static_cast<double>(c.variant_only) / static_cast<double>(n);
  const double pb = static_cast<double>(c.both) / static_cast<double>(n);
  auto binomial = [&rng](std::int64_t trials, double p) -> std::int64_t {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    boost::random::binomial_distribution<std::int64_t, double> dist(trials, p);
    return dist(rng.engine());
  };
  std::vector<double> deltas;
  deltas.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    CreditCounts r;
    r.sessions = n;
    r.control_only = binomial(n, pc);
    const double rest_v = 1.0 - pc;
    r.variant_only = binomial(n - r.control_only, rest_v > 0.0 ? pv / rest_v : 0.0);
    const double rest_b = 1.0 - pc - pv;
    r.both = binomial(n - r.control_only - r.variant_only, rest_b > 0.0 ? pb / rest_b : 0.0);
    const auto [ctrl, var] = credits(r, rule);
    deltas.push_back(var - ctrl == 0 ? 0.0
                                     : stats::relative_change(static_cast<double>(ctrl),
                                                              static_cast<double>(var)));
  }
  std::sort(deltas.begin(), deltas.end());
  const auto index = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(samples - 1)));
    return deltas[std::min(i, deltas.size() - 1)];
  };
  const double lo = index(alpha / 2.0);
  const double hi = index(1.0 - alpha / 2.0);
  return lo > 0.0 || hi < 0.0;
}

std::vector<QueryProduct> universe_at(const sim::World& world, int day) {
  std::vector<QueryProduct> universe;
  for (std::size_t q = 0; q < world.queries().size(); ++q) {
    const auto& query = world.queries()[q];
    for (std::size_t p : world.candidates(q, day)) {
      universe.emplace_back(query.id, query.products[p].id);
    }
  }
  return universe;
}

}  // namespace

namespace detail {

void check_same_candidates(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> sa(a.begin(), a.end());
  std::vector<std::size_t> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb || std::adjacent_find(sa.begin(), sa.end()) != sa.end()) {
    throw ContractError("team_draft_interleave: rankings are not over the same candidate set");
  }
}

}  // namespace detail

std::string_view to_string(VariantName name) {
  switch (name) {
    case VariantName::kBaseline:
      return "Baseline";
    case VariantName::kModelA:
      return "ModelA";
    case VariantName::kModelB:
      return "ModelB";
    case VariantName::kModelC:
      return "ModelC";
  }
  return "?";
}

std::optional<VariantName> parse_variant(std::string_view text) {
  for (auto v : kAllVariants) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

ModelVariant ModelVariant::of(VariantName name) {
  switch (name) {
    case VariantName::kBaseline:
      return {name, {kLongWindowDays}, false};
    case VariantName::kModelA:
      return {name, {kShortWindowDays}, false};
    case VariantName::kModelB:
      return {name, {kLongWindowDays, kShortWindowDays}, false};
    case VariantName::kModelC:
      return {name, {kLongWindowDays, kShortWindowDays}, true};
  }
  return {};
}

std::vector<std::string> ModelVariant::feature_names() const {
  return features::feature_names(windows, include_verticals);
}

int grade_from_counts(const events::Counts& counts) {
  if (counts.orders > 0) return 3;
  if (counts.atcs > 0) return 2;
  if (counts.clicks > 0) return 1;
  return 0;
}

ltr::RankingDataset assemble_variant_dataset(std::span<const EngagementEvent> events,
                                             const VerticalLabelMap& labels,
                                             const ModelVariant& variant, Day reference_date,
                                             std::span<const QueryProduct> universe,
                                             const LabelWindow& label_window,
                                             const features::BehaviorPriors& priors) {
  if (label_window.first_day <= reference_date) {
    throw ContractError("label window starting " + format_day(label_window.first_day) +
                        " overlaps features ending " + format_day(reference_date));
  }
  if (label_window.length_days < 1) throw ContractError("label window must span >= 1 day");

  std::vector<events::WindowSpec> windows;
  for (int days : variant.windows) windows.push_back({days, reference_date});
  const auto vectors =
      features::build_feature_matrix(events, windows, priors, labels, universe);

  const events::WindowSpec label_spec{label_window.length_days, label_window.last_day()};
  std::map<QueryProduct, events::Counts> label_counts;
  for (const auto& [key, counts] : features::aggregate_counts(events, label_spec)) {
    label_counts[{key.query_id, key.product_id}] += counts;
  }

  ltr::RankingDataset dataset;
  dataset.feature_names = variant.feature_names();
  std::map<std::string, std::size_t, std::less<>> group_of;
  for (const auto& fv : vectors) {
    auto [it, inserted] = group_of.try_emplace(fv.query_id, dataset.groups.size());
    if (inserted) dataset.groups.push_back({fv.query_id, {}});
    ltr::Document doc;
    doc.product_id = fv.product_id;
    doc.features = features::to_dense(fv, dataset.feature_names);
    auto lc = label_counts.find({fv.query_id, fv.product_id});
    doc.grade = lc == label_counts.end() ? 0 : grade_from_counts(lc->second);
    dataset.groups[it->second].docs.push_back(std::move(doc));
  }
  std::erase_if(dataset.groups, [](const ltr::QueryGroup& g) { return g.docs.size() < 2; });
  return dataset;
}

ltr::RankingDataset project_dataset(const ltr::RankingDataset& dataset,
                                    std::span<const std::string> names) {
  std::vector<std::size_t> columns;
  for (const auto& name : names) {
    auto it = std::find(dataset.feature_names.begin(), dataset.feature_names.end(), name);
    if (it == dataset.feature_names.end()) {
      throw ContractError("project_dataset: no column '" + name + "'");
    }
    columns.push_back(static_cast<std::size_t>(it - dataset.feature_names.begin()));
  }
  ltr::RankingDataset out;
  out.feature_names.assign(names.begin(), names.end());
  out.groups.reserve(dataset.groups.size());
  for (const auto& group : dataset.groups) {
    ltr::QueryGroup g{group.query_id, {}};
    g.docs.reserve(group.docs.size());
    for (const auto& doc : group.docs) {
      ltr::Document d{doc.product_id, {}, doc.grade};
      d.features.reserve(columns.size());
      for (auto c : columns) d.features.push_back(doc.features[c]);
      g.docs.push_back(std::move(d));
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

Interleaving team_draft_interleave(std::span<const std::size_t> ranking_a,
                                   std::span<const std::size_t> ranking_b, Rng& rng) {
  return team_draft_interleave(ranking_a, ranking_b, [&rng] { return rng.coin(); });
}

std::string_view to_string(CreditRule rule) {
  return rule == CreditRule::kTeam ? "team" : "per-arm";
}

void InterleavingReport::write_csv(std::ostream& out) const {
  out << "vertical,delta,significant,n\n";
  for (const auto& row : rows) {
    out << row.segment << ',' << ltr::format_double(row.delta) << ','
        << (row.significant ? "true" : "false") << ',' << row.sessions << '\n';
  }
}

void InterleavingReport::write_text(std::ostream& out, std::string_view title) const {
  out << title << "  (credit: " << to_string(rule)
      << (bootstrap ? ", bootstrap significance" : ", z-test") << ")\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "  %-12s %10s %4s %9s %9s %9s\n", "vertical", "change", "sig",
                "sessions", "control", "variant");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "  %-12s %10s %4s %9lld %9lld %9lld\n", row.segment.c_str(),
                  percent(row.delta).c_str(), row.significant ? "*" : "",
                  static_cast<long long>(row.sessions), static_cast<long long>(row.control_credit),
                  static_cast<long long>(row.variant_credit));
    out << buf;
  }
}

QueryRankings rank_with_model(const ltr::GbdtModel& model, const sim::World& world,
                              std::span<const EngagementEvent> events, int serve_day,
                              const features::BehaviorPriors& priors) {
  std::set<int> window_days;
  for (const auto& name : model.feature_names) {
    if (auto key = features::parse_feature_key(name)) {
      window_days.insert(key->window_days);
    } else if (!features::parse_vertical_feature(name)) {
      throw ContractError("model feature '" + name + "' cannot be computed from event logs");
    }
  }
  if (window_days.empty()) window_days.insert(1);
  std::vector<events::WindowSpec> windows;
  for (int d : window_days) windows.push_back({d, world.date(serve_day)});

  const auto universe = universe_at(world, serve_day);
  const auto vectors =
      features::build_feature_matrix(events, windows, priors, world.labels(), universe);

  QueryRankings rankings(world.queries().size());
  std::size_t v = 0;
  for (std::size_t q = 0; q < world.queries().size(); ++q) {
    const auto candidates = world.candidates(q, serve_day);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i, ++v) {
      scores.push_back(model.predict(features::to_dense(vectors[v], model.feature_names)));
    }
    for (std::size_t i : ltr::rank_by_score(scores)) rankings[q].push_back(candidates[i]);
  }
  return rankings;
}

InterleavingReport run_interleaving_test(const sim::World& world, const QueryRankings& control,
                                         const QueryRankings& variant, const TestPeriod& period,
                                         std::uint64_t seed, const TestOptions& options) {
  const auto& queries = world.queries();
  if (control.size() != queries.size() || variant.size() != queries.size()) {
    throw ContractError("run_interleaving_test: need one ranking per query");
  }
  if (period.num_days < 1 || period.sessions_per_day < 1 || queries.empty()) {
    throw ContractError("run_interleaving_test: zero sessions");
  }
  if (period.first_day < 0 || period.first_day + period.num_days > world.horizon()) {
    throw ContractError("run_interleaving_test: test period outside the world horizon");
  }

  std::vector<CreditCounts> per_query(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Rng rng(derive_seed(seed, kInterleaveStream + q));
    CreditCounts& tally = per_query[q];
    const std::size_t num_products = queries[q].products.size();
    std::vector<sim::Propensities> by_product(num_products);
    std::vector<sim::Propensities> shown;
    detail::check_same_candidates(control[q], variant[q]);
    for (int d = 0; d < period.num_days; ++d) {
      const int day = period.first_day + d;
      for (std::size_t p : control[q]) by_product[p] = world.affinity(q, p, day);
      for (int s = 0; s < period.sessions_per_day; ++s) {
        const auto merged =
            detail::team_draft(control[q], variant[q], [&rng] { return rng.coin(); });
        shown.clear();
        for (std::size_t p : merged.ranking) shown.push_back(by_product[p]);
        const auto outcomes = sim::simulate_outcomes(shown, world.config().user, rng);
        bool control_engaged = false;
        bool variant_engaged = false;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          if (!outcomes[i].clicked) continue;
          (merged.teams[i] == Team::kA ? control_engaged : variant_engaged) = true;
        }
        ++tally.sessions;
        if (control_engaged && variant_engaged) {
          ++tally.both;
        } else if (control_engaged) {
          ++tally.control_only;
        } else if (variant_engaged) {
          ++tally.variant_only;
        }
      }
    }
  }

  std::array<CreditCounts, events::kNumVerticals + 1> segments{};
  for (std::size_t q = 0; q < queries.size(); ++q) {
    segments[static_cast<std::size_t>(queries[q].vertical)] += per_query[q];
    segments[kOverall] += per_query[q];
  }

  InterleavingReport report;
  report.rule = options.credit;
  report.bootstrap = options.bootstrap;
  Rng boot_rng(derive_seed(seed, kBootstrapStream));
  for (std::size_t s = 0; s <= kOverall; ++s) {
    const auto& c = segments[s];
    InterleavingRow row;
    row.segment = s == kOverall ? "Overall" : std::string(events::to_string(events::kAllVerticals[s]));
    row.sessions = c.sessions;
    std::tie(row.control_credit, row.variant_credit) = credits(c, options.credit);
    row.delta = stats::relative_change(static_cast<double>(row.control_credit),
                                       static_cast<double>(row.variant_credit));
    const auto test =
        stats::paired_proportion_test(c.variant_only, c.control_only, c.sessions, options.alpha);
    row.z = test.z;
    row.significant = options.bootstrap
                          ? bootstrap_significant(c, options.credit, options.alpha,
                                                  options.bootstrap_samples, boot_rng)
                          : test.significant;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void AbReport::write_csv(std::ostream& out) const {
  out << "metric,control,variant,lift,significant\n";
  for (const auto* m : {&atc_at_10, &sessions_with_atc, &abandonment}) {
    out << m->name << ',' << ltr::format_double(m->control) << ','
        << ltr::format_double(m->variant) << ',' << ltr::format_double(m->lift) << ','
        << (m->significant ? "true" : "false") << '\n';
  }
}

void AbReport::write_text(std::ostream& out) const {
  out << "A/B test (" << control_sessions << " control / " << variant_sessions
      << " variant sessions)\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "  %-20s %10s %10s %10s %4s\n", "metric", "control", "variant",
                "lift", "sig");
  out << buf;
  for (const auto* m : {&atc_at_10, &sessions_with_atc, &abandonment}) {
    std::snprintf(buf, sizeof buf, "  %-20s %10.4f %10.4f %10s %4s\n", m->name.c_str(),
                  m->control, m->variant, percent(m->lift).c_str(), m->significant ? "*" : "");
    out << buf;
  }
}

AbReport run_ab_test(const sim::World& world, const QueryRankings& control,
                     const QueryRankings& variant, const TestPeriod& period, std::uint64_t seed,
                     double alpha) {
  const auto& queries = world.queries();
  if (control.size() != queries.size() || variant.size() != queries.size()) {
    throw ContractError("run_ab_test: need one ranking per query");
  }
  if (period.first_day < 0 || period.first_day + period.num_days > world.horizon()) {
    throw ContractError("run_ab_test: test period outside the world horizon");
  }

  struct Arm {
    std::int64_t sessions = 0;
    std::int64_t with_atc = 0;
    std::int64_t abandoned = 0;
    std::int64_t atcs = 0;
    std::int64_t atcs_top = 0;
  };
  std::array<Arm, 2> arms{};
  std::vector<sim::Propensities> by_product;
  std::vector<sim::Propensities> shown;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Rng rng(derive_seed(seed, kAbStream + q));
    by_product.assign(queries[q].products.size(), {});
    for (int d = 0; d < period.num_days; ++d) {
      const int day = period.first_day + d;
      for (std::size_t p : control[q]) by_product[p] = world.affinity(q, p, day);
      for (std::size_t p : variant[q]) by_product[p] = world.affinity(q, p, day);
      for (int s = 0; s < period.sessions_per_day; ++s) {
        const std::size_t arm_index = rng.coin() ? 1 : 0;
        const auto& ranking = arm_index == 1 ? variant[q] : control[q];
        shown.clear();
        for (std::size_t p : ranking) shown.push_back(by_product[p]);
        const auto outcomes = sim::simulate_outcomes(shown, world.config().user, rng);
        Arm& arm = arms[arm_index];
        ++arm.sessions;
        bool engaged = false;
        bool atc = false;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          engaged = engaged || outcomes[i].clicked;
          if (outcomes[i].atc) {
            atc = true;
            ++arm.atcs;
            if (i < static_cast<std::size_t>(kAtcTopPositions)) ++arm.atcs_top;
          }
        }
        arm.with_atc += atc;
        arm.abandoned += !engaged;
      }
    }
  }
  if (arms[0].sessions == 0 || arms[1].sessions == 0) {
    throw ContractError("run_ab_test: an arm received zero sessions");
  }

  auto metric = [alpha](std::string name, std::int64_t x0, std::int64_t n0, std::int64_t x1,
                        std::int64_t n1) {
    AbMetric m;
    m.name = std::move(name);
    m.control = n0 == 0 ? 0.0 : static_cast<double>(x0) / static_cast<double>(n0);
    m.variant = n1 == 0 ? 0.0 : static_cast<double>(x1) / static_cast<double>(n1);
    m.lift = stats::relative_change(m.control, m.variant);
    m.control_n = n0;
    m.variant_n = n1;
    const auto test = stats::two_proportion_test(x0, n0, x1, n1, alpha);
    m.z = test.z;
    m.significant = test.significant;
    return m;
  };
  AbReport report;
  report.control_sessions = arms[0].sessions;
  report.variant_sessions = arms[1].sessions;
  report.atc_at_10 =
      metric("atc_at_10", arms[0].atcs_top, arms[0].atcs, arms[1].atcs_top, arms[1].atcs);
  report.sessions_with_atc = metric("sessions_with_atc", arms[0].with_atc, arms[0].sessions,
                                    arms[1].with_atc, arms[1].sessions);
  report.abandonment = metric("session_abandonment", arms[0].abandoned, arms[0].sessions,
                              arms[1].abandoned, arms[1].sessions);
  return report;
}

void ExperimentConfig::validate(const sim::ScenarioConfig& scenario) const {
  if (label_days < 1 || train_snapshots < 1 || snapshot_stride < 1 || test_days < 1 ||
      test_sessions_per_day < 1) {
    throw ConfigError(
        "experiment: label_days, train_snapshots, snapshot_stride, test_days and "
        "test_sessions_per_day must be >= 1");
  }
  const int earliest = feature_reference_day - (train_snapshots - 1) * snapshot_stride;
  if (earliest < 0) throw ConfigError("experiment: earliest training snapshot precedes day 0");
  if (serve_day() + test_days >= scenario.horizon_days) {
    throw ConfigError("experiment: test period runs past horizon_days (" +
                      std::to_string(scenario.horizon_days) + ")");
  }
  if (!(test.alpha > 0.0 && test.alpha < 1.0)) throw ConfigError("experiment: alpha in (0, 1)");
  train.validate();
  for (auto b : features::kAllBehaviors) priors[b].validate();
}

ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.feature_reference_day =
      static_cast<int>(kv.get_int("experiment.feature_reference_day", c.feature_reference_day));
  c.label_days = static_cast<int>(kv.get_int("experiment.label_days", c.label_days));
  c.train_snapshots = static_cast<int>(kv.get_int("experiment.train_snapshots", c.train_snapshots));
  c.snapshot_stride = static_cast<int>(kv.get_int("experiment.snapshot_stride", c.snapshot_stride));
  c.test_days = static_cast<int>(kv.get_int("experiment.test_days", c.test_days));
  c.test_sessions_per_day =
      static_cast<int>(kv.get_int("experiment.test_sessions_per_day", c.test_sessions_per_day));
  c.test.alpha = kv.get_double("experiment.alpha", c.test.alpha);
  const auto credit = kv.get_string("experiment.credit", std::string(to_string(c.test.credit)));
  if (credit == "team") {
    c.test.credit = CreditRule::kTeam;
  } else if (credit == "per-arm") {
    c.test.credit = CreditRule::kPerArm;
  } else {
    throw ConfigError("experiment.credit must be 'team' or 'per-arm'");
  }
  c.test.bootstrap = kv.get_bool("experiment.bootstrap", c.test.bootstrap);
  c.test.bootstrap_samples =
      static_cast<int>(kv.get_int("experiment.bootstrap_samples", c.test.bootstrap_samples));

  auto& t = c.train;
  t.num_trees = static_cast<int>(kv.get_int("train.num_trees", t.num_trees));
  t.max_depth = static_cast<int>(kv.get_int("train.max_depth", t.max_depth));
  t.min_samples_leaf = static_cast<int>(kv.get_int("train.min_samples_leaf", t.min_samples_leaf));
  t.learning_rate = kv.get_double("train.learning_rate", t.learning_rate);
  t.sigma = kv.get_double("train.sigma", t.sigma);
  t.ndcg_k = static_cast<int>(kv.get_int("train.ndcg_k", t.ndcg_k));

  auto read_prior = [&kv](const std::string& name, features::PriorSpec& prior) {
    prior.alpha = kv.get_double("priors." + name + "_alpha", prior.alpha);
    prior.beta = kv.get_double("priors." + name + "_beta", prior.beta);
  };
  read_prior("cr", c.priors.click);
  read_prior("ar", c.priors.atc);
  read_prior("or", c.priors.order);
  return c;
}

void write_experiment_config(std::ostream& out, const ExperimentConfig& c) {
  using ltr::format_double;
  out << "[experiment]\n"
      << "feature_reference_day = " << c.feature_reference_day << '\n'
      << "label_days = " << c.label_days << '\n'
      << "train_snapshots = " << c.train_snapshots << '\n'
      << "snapshot_stride = " << c.snapshot_stride << '\n'
      << "test_days = " << c.test_days << '\n'
      << "test_sessions_per_day = " << c.test_sessions_per_day << '\n'
      << "alpha = " << format_double(c.test.alpha) << '\n'
      << "credit = \"" << to_string(c.test.credit) << "\"\n"
      << "bootstrap = " << (c.test.bootstrap ? "true" : "false") << '\n'
      << "bootstrap_samples = " << c.test.bootstrap_samples << '\n'
      << "\n[train]\n"
      << "num_trees = " << c.train.num_trees << '\n'
      << "max_depth = " << c.train.max_depth << '\n'
      << "min_samples_leaf = " << c.train.min_samples_leaf << '\n'
      << "learning_rate = " << format_double(c.train.learning_rate) << '\n'
      << "sigma = " << format_double(c.train.sigma) << '\n'
      << "ndcg_k = " << c.train.ndcg_k << '\n'
      << "\n[priors]\n";
  for (auto b : features::kAllBehaviors) {
    const auto name = std::string(features::to_string(b));
    out << name << "_alpha = " << format_double(c.priors[b].alpha) << '\n'
        << name << "_beta = " << format_double(c.priors[b].beta) << '\n';
  }
}

ltr::RankingDataset assemble_training_set(const sim::World& world,
                                          std::span<const EngagementEvent> events,
                                          const ModelVariant& variant,
                                          const ExperimentConfig& config) {
  ltr::RankingDataset all;
  all.feature_names = variant.feature_names();
  const auto labels = world.labels();
  for (int k = 0; k < config.train_snapshots; ++k) {
    const int ref_day = config.feature_reference_day - k * config.snapshot_stride;
    const Day ref_date = world.date(ref_day);
    const auto universe = universe_at(world, ref_day);
    auto part = assemble_variant_dataset(events, labels, variant, ref_date, universe,
                                         LabelWindow::after(ref_date, config.label_days),
                                         config.priors);
    const std::string suffix = "@" + format_day(ref_date);
    for (auto& group : part.groups) {
      group.query_id += suffix;
      all.groups.push_back(std::move(group));
    }
  }
  return all;
}

const VariantModel& ReproSummary::model(VariantName name) const {
  for (const auto& m : models) {
    if (m.variant.name == name) return m;
  }
  throw ContractError("repro summary has no model " + std::string(to_string(name)));
}

double ReproSummary::window_share(Vertical vertical, int window_days) const {
  return c_tree.share_where(features::vertical_feature_name(vertical),
                            [window_days](const std::string& name) {
                              auto key = features::parse_feature_key(name);
                              return key && key->window_days == window_days;
                            });
}

void ReproSummary::write_directional_csv(std::ostream& out) const {
  out << "test,vertical,delta,significant,n\n";
  for (const auto& [name, report] :
       {std::pair{"ModelA_vs_Baseline", &a_vs_baseline}, std::pair{"ModelB_vs_Baseline", &b_vs_baseline},
        std::pair{"ModelC_vs_Baseline", &c_vs_baseline}}) {
    for (const auto& row : report->rows) {
      out << name << ',' << row.segment << ',' << ltr::format_double(row.delta) << ','
          << (row.significant ? "true" : "false") << ',' << row.sessions << '\n';
    }
  }
}

void ReproSummary::write_text(std::ostream& out) const {
  out << "seed " << seed << "\n\n";
  out << "Training NDCG@k (final round):\n";
  char buf[128];
  for (const auto& m : models) {
    std::snprintf(buf, sizeof buf, "  %-10s %2zu features  %.4f\n",
                  std::string(to_string(m.variant.name)).c_str(), m.model.feature_names.size(),
                  m.log.train_ndcg.empty() ? 0.0 : m.log.train_ndcg.back());
    out << buf;
  }
  out << '\n';
  a_vs_baseline.write_text(out, "Test 1: Baseline (control) vs ModelA (variant)");
  out << '\n';
  b_vs_baseline.write_text(out, "Test 2: Baseline (control) vs ModelB (variant)");
  out << '\n';
  c_vs_baseline.write_text(out, "Test 3: Baseline (control) vs ModelC (variant)");
  out << '\n';
  c_ab.write_text(out);
  out << "\nModelC behavioral children of vertical split nodes:\n";
  for (auto v : events::kAllVerticals) {
    const auto& entry = c_tree.parents.at(features::vertical_feature_name(v));
    std::snprintf(buf, sizeof buf, "  %-12s %4ld split nodes  30-day %.3f  730-day %.3f\n",
                  std::string(events::to_string(v)).c_str(), entry.parent_nodes,
                  window_share(v, kShortWindowDays), window_share(v, kLongWindowDays));
    out << buf;
  }
}

ReproSummary repro_on_world(const sim::World& world, std::span<const EngagementEvent> events,
                            const ExperimentConfig& config, std::uint64_t seed, int threads) {
  config.validate(world.config());
  ReproSummary summary;
  summary.seed = seed;

  // Model C's columns are a superset of every other variant's.
  const auto full = assemble_training_set(world, events,
                                          ModelVariant::of(VariantName::kModelC), config);
  summary.models.resize(kAllVariants.size());
  parallel_for(kAllVariants.size(), threads, [&](std::size_t i) {
    auto& vm = summary.models[i];
    vm.variant = ModelVariant::of(kAllVariants[i]);
    const auto names = vm.variant.feature_names();
    vm.model = ltr::train(project_dataset(full, names), config.train, &vm.log);
  });

  std::vector<QueryRankings> rankings(kAllVariants.size());
  for (std::size_t i = 0; i < kAllVariants.size(); ++i) {
    rankings[i] =
        rank_with_model(summary.models[i].model, world, events, config.serve_day(), config.priors);
  }
  const auto period = config.test_period();
  const auto& base = rankings[0];
  // One session stream for all three tests: common random numbers make the
  // variants' deltas directly comparable.
  const auto test_seed = derive_seed(seed, kTestStream);
  summary.a_vs_baseline =
      run_interleaving_test(world, base, rankings[1], period, test_seed, config.test);
  summary.b_vs_baseline =
      run_interleaving_test(world, base, rankings[2], period, test_seed, config.test);
  summary.c_vs_baseline =
      run_interleaving_test(world, base, rankings[3], period, test_seed, config.test);
  summary.c_ab = run_ab_test(world, base, rankings[3], period, test_seed, config.test.alpha);

  const auto& c_model = summary.models[3].model;
  std::set<std::string> parents;
  std::set<std::string> behavioral;
  for (const auto& name : c_model.feature_names) {
    (features::parse_vertical_feature(name) ? parents : behavioral).insert(name);
  }
  summary.c_tree = trees::child_feature_distribution(c_model, parents, behavioral);
  return summary;
}

std::vector<EngagementEvent> simulate_log(const sim::World& world, int last_day,
                                          std::uint64_t seed, int threads) {
  return sim::generate_event_log(world,
                                 sim::noisy_affinity_ranker(world, world.config().logging_noise),
                                 0, last_day, derive_seed(seed, kLogStream), threads);
}

ReproSummary repro_paper_scenario(const sim::ScenarioConfig& scenario,
                                  const ExperimentConfig& config, std::uint64_t seed,
                                  int threads) {
  sim::ScenarioConfig seeded = scenario;
  seeded.seed = seed;
  config.validate(seeded);
  const auto world = sim::generate_world(seeded);
  const auto events = simulate_log(world, config.last_log_day(), seed, threads);
  return repro_on_world(world, events, config, seed, threads);
}

}  // namespace ltrlab::exp
