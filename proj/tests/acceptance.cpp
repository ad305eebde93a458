// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ltrlab/experiments.hpp"
#include "ltrlab/feature_builder.hpp"
#include "ltrlab/gbdt.hpp"
#include "ltrlab/ranking_metrics.hpp"
#include "ltrlab/stats.hpp"

using namespace ltrlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. feature oracle

using events::Counts;
using events::EngagementEvent;
using events::Source;

const Day kEpoch = parse_day("2020-01-01");

struct RandomLog {
  std::vector<EngagementEvent> events;
  std::vector<features::QueryProduct> universe;
  events::VerticalLabelMap labels;
  int horizon = 1;
};

RandomLog random_log(std::mt19937_64& gen, int max_pairs, int max_days, int max_events) {
  RandomLog out;
  const int nq = std::uniform_int_distribution<int>(1, 5)(gen);
  const int np = std::uniform_int_distribution<int>(1, max_pairs / nq)(gen);
  out.horizon = std::uniform_int_distribution<int>(1, max_days)(gen);
  for (int q = 0; q < nq; ++q) {
    const auto qid = "q" + std::to_string(q);
    out.labels.set(qid, events::kAllVerticals[gen() % 6]);
    for (int p = 0; p < np; ++p) out.universe.emplace_back(qid, "p" + std::to_string(p));
  }
  const int n = std::uniform_int_distribution<int>(0, max_events)(gen);
  std::uniform_int_distribution<int> day(0, out.horizon - 1), ex(0, 30);
  for (int i = 0; i < n; ++i) {
    const auto& [q, p] = out.universe[gen() % out.universe.size()];
    Counts c;
    c.examines = ex(gen);
    std::uniform_int_distribution<int> b(0, static_cast<int>(c.examines));
    c.orders = b(gen);
    c.atcs = std::max<std::int64_t>(c.orders, b(gen));
    c.clicks = std::max<std::int64_t>(c.atcs, b(gen));
    out.events.push_back({q, p, (gen() & 1) ? Source::kApp : Source::kWeb, add_days(kEpoch, day(gen)), c});
  }
  out.events = events::merge_events(std::move(out.events));
  return out;
}

Outcome feature_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> prior(0.1, 20.0);
  long mismatched_sums = 0, compared = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto log = random_log(gen, 50, 800, 400);
    const Day ref = add_days(kEpoch, std::uniform_int_distribution<int>(0, log.horizon + 10)(gen));
    const std::vector<events::WindowSpec> windows{{730, ref}, {30, ref}};
    const features::BehaviorPriors priors{{prior(gen), prior(gen)}, {prior(gen), prior(gen)},
                                          {prior(gen), prior(gen)}};

    // per-day series, summed day by day over each window
    std::map<features::CountKey, std::map<int, Counts>> daily;
    for (const auto& e : log.events) {
      daily[{e.query_id, e.product_id, e.source}][days_between(kEpoch, e.day)] += e.counts;
    }
    const auto rows = features::build_feature_matrix(log.events, windows, priors, log.labels, log.universe);
    for (const auto& w : windows) {
      const int last = days_between(kEpoch, ref);
      features::CountMap oracle;
      for (const auto& [key, days] : daily) {
        Counts sum;
        bool any = false;
        for (int d = last - w.length_days + 1; d <= last; ++d) {
          const auto it = days.find(d);
          if (it == days.end()) continue;
          sum += it->second;
          any = true;
        }
        if (any) oracle[key] = sum;
      }
      mismatched_sums += features::aggregate_counts(log.events, w) != oracle;
      for (const auto& row : rows) {
        for (Source s : events::kAllSources) {
          const auto it = oracle.find({row.query_id, row.product_id, s});
          const Counts c = it == oracle.end() ? Counts{} : it->second;
          const double e = static_cast<double>(c.examines);
          const std::pair<std::int64_t, const features::PriorSpec*> parts[] = {
              {c.clicks, &priors.click}, {c.atcs, &priors.atc}, {c.orders, &priors.order}};
          for (std::size_t b = 0; b < 3; ++b) {
            const auto& [num, pr] = parts[b];
            const double expected = (static_cast<double>(num) + pr->alpha) / (e + pr->alpha + pr->beta);
            const double got = row.behavioral.at({s, w.length_days, features::kAllBehaviors[b]});
            worst = std::max(worst, std::abs(got - expected));
            ++compared;
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatched_sums == 0 && worst <= 1e-12 && secs < 30.0,
          fmt("1000 logs, %ld rates, sum mismatches %ld, max |diff| %.3g, %.1fs", compared,
              mismatched_sums, worst, secs)};
}

// ---------------------------------------------------------------------------
// 2. incremental/batch equivalence

Outcome incremental_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1002);
  long steps = 0, mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto log = random_log(gen, 50, 120, 600);
    std::map<Day, std::vector<EngagementEvent>> by_day;
    for (const auto& e : log.events) by_day[e.day].push_back(e);
    auto agg = features::RollingAggregate::from_events(log.events, {30, add_days(kEpoch, 29)});
    mismatches += agg.sums() != features::aggregate_counts(log.events, agg.window());
    for (int d = 30; d < 120; ++d) {
      const Day day = add_days(kEpoch, d);
      const auto it = by_day.find(day);
      agg.advance_day(it == by_day.end() ? std::vector<EngagementEvent>{} : it->second);
      mismatches += agg.sums() != features::aggregate_counts(log.events, agg.window());
      mismatches += !agg.check_invariants();
      ++steps;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt("200 sequences, %ld steps, %ld mismatches, %.1fs", steps, mismatches, secs)};
}

// ---------------------------------------------------------------------------
// 3. cold start

Outcome cold_start() {
  events::VerticalLabelMap labels;
  labels.set("q", events::Vertical::kHome);
  const Day ref = parse_day("2023-06-01");
  // the log has traffic for other pairs only
  const std::vector<EngagementEvent> log{{"q", "other", Source::kWeb, ref, {10, 4, 2, 1}}};
  const std::vector<events::WindowSpec> windows{{730, ref}, {30, ref}};
  const features::BehaviorPriors priors{{1, 19}, {3, 47}, {0.5, 99.5}};
  const std::vector<features::QueryProduct> universe{{"q", "new"}};
  const auto rows = features::build_feature_matrix(log, windows, priors, labels, universe);
  int exact = 0;
  for (const auto& [key, value] : rows[0].behavioral) {
    const auto& p = priors[key.behavior];
    exact += value == p.alpha / (p.alpha + p.beta);
  }
  return {exact == 12, fmt("%d of 12 features equal alpha/(alpha+beta)", exact)};
}

// ---------------------------------------------------------------------------
// 4. lambda gradient check

double ndcg_of(std::vector<int> ranked, int k) {
  auto dcg = [k](const std::vector<int>& g) {
    double s = 0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(g.size())); ++i) {
      s += (std::pow(2.0, g[i]) - 1) / std::log2(i + 2.0);
    }
    return s;
  };
  auto ideal = ranked;
  std::sort(ideal.rbegin(), ideal.rend());
  return dcg(ideal) == 0 ? 1.0 : dcg(ranked) / dcg(ideal);
}

Outcome lambda_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1004);
  std::normal_distribution<double> z(0, 1);
  double worst_fd = 0, worst_sum = 0;
  const double sigma = 1.0;
  const int k = 10;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(gen);
    std::vector<double> s(n);
    std::vector<int> g(n);
    for (int i = 0; i < n; ++i) {
      s[i] = z(gen);
      g[i] = static_cast<int>(gen() % 4);
    }
    const auto r = ltr::lambda_gradients(s, g, sigma, k);
    // frozen weights: |delta NDCG| of swapping at the current ranks
    const auto order = ltr::rank_by_score(s);
    std::vector<int> rank(n), ranked(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;
    for (int i = 0; i < n; ++i) ranked[rank[i]] = g[i];
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (g[i] <= g[j]) continue;
        auto swapped = ranked;
        std::swap(swapped[rank[i]], swapped[rank[j]]);
        w[i][j] = std::abs(ndcg_of(swapped, k) - ndcg_of(ranked, k));
      }
    }
    auto loss = [&](const std::vector<double>& x) {
      double l = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (g[i] > g[j]) l += w[i][j] * std::log1p(std::exp(-sigma * (x[i] - x[j])));
        }
      }
      return l;
    };
    double total = 0;
    for (int i = 0; i < n; ++i) {
      auto up = s, down = s;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double numeric = -(loss(up) - loss(down)) / 2e-5;
      worst_fd = std::max(worst_fd, std::abs(numeric - r.lambdas[i]));
      total += r.lambdas[i];
    }
    worst_sum = std::max(worst_sum, std::abs(total));
  }
  const double secs = seconds_since(t0);
  return {worst_fd <= 1e-6 && worst_sum <= 1e-12 && secs < 10.0,
          fmt("max |fd diff| %.3g, max |sum| %.3g, %.2fs", worst_fd, worst_sum, secs)};
}

// ---------------------------------------------------------------------------
// 5. NDCG hand cases

Outcome ndcg_cases() {
  const double v = ltr::ndcg_at_k(std::vector<int>{0, 3}, 2);
  bool ideal_exact = true;
  std::mt19937_64 gen(1005);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> g(1 + gen() % 12);
    for (auto& x : g) x = static_cast<int>(gen() % 4);
    std::sort(g.rbegin(), g.rend());
    ideal_exact = ideal_exact && ltr::ndcg_at_k(g, 1 + static_cast<int>(gen() % 12)) == 1.0;
  }
  const bool zeros = ltr::ndcg_at_k(std::vector<int>{0, 0, 0}, 3) == 1.0 &&
                     ltr::ndcg_at_k(std::vector<int>{0}, 1) == 1.0;
  return {std::abs(v - 0.630930) <= 1e-6 && ideal_exact && zeros,
          fmt("[0,3]@2 = %.6f, ideal orderings exact: %s, all-zero: %s", v, ideal_exact ? "yes" : "no",
              zeros ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 6. trainer sanity

Outcome trainer_sanity() {
  const auto t0 = Clock::now();
  int reached = 0;
  double lowest = 1.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0, 0.1);
    std::uniform_real_distribution<double> u(0, 1);
    ltr::RankingDataset d;
    d.feature_names = {"signal", "junk_a", "junk_b"};
    for (int q = 0; q < 50; ++q) {
      ltr::QueryGroup group{"q" + std::to_string(q), {}};
      for (int i = 0; i < 12; ++i) {
        const int grade = static_cast<int>(gen() % 4);
        group.docs.push_back({"p" + std::to_string(i), {grade + noise(gen), u(gen), u(gen)}, grade});
      }
      d.groups.push_back(std::move(group));
    }
    ltr::TrainParams p;
    p.num_trees = 50;
    p.seed = seed;
    const auto model = ltr::train(d, p);
    double total = 0;
    for (const auto& g : d.groups) {
      std::vector<double> scores;
      for (const auto& doc : g.docs) scores.push_back(model.predict(doc.features));
      std::vector<int> ranked;
      for (auto i : ltr::rank_by_score(scores)) ranked.push_back(g.docs[i].grade);
      total += ndcg_of(ranked, 10);
    }
    const double ndcg = total / static_cast<double>(d.groups.size());
    lowest = std::min(lowest, ndcg);
    reached += ndcg >= 0.95;
  }
  const double secs = seconds_since(t0);
  return {reached >= 19 && secs < 60.0,
          fmt("%d/20 seeds reach NDCG@10 >= 0.95 (lowest %.4f), %.1fs", reached, lowest, secs)};
}

// ---------------------------------------------------------------------------
// 7. A/A calibration

Outcome aa_calibration() {
  const auto t0 = Clock::now();
  const exp::ExperimentConfig config;
  auto scenario = sim::ScenarioConfig::standard();
  const auto world = sim::generate_world(scenario);
  const int serve = config.serve_day();
  const auto ranker = sim::noisy_affinity_ranker(world, scenario.logging_noise);
  Rng rng(1007);
  exp::QueryRankings rankings;
  for (std::size_t q = 0; q < world.queries().size(); ++q) rankings.push_back(ranker(q, serve, rng));

  const long runs = 50;
  int flagged = 0, positive = 0, negative = 0;
  for (std::uint64_t seed = 1; seed <= runs; ++seed) {
    const auto r = exp::run_interleaving_test(world, rankings, rankings, config.test_period(), seed, config.test);
    flagged += r.overall().significant;
    positive += r.overall().delta > 0;
    negative += r.overall().delta < 0;
  }
  // 7 of 50 plus slack: the 95th percentile of Bin(50, 0.10)
  const auto limit = std::max<std::int64_t>(7, stats::binomial_quantile(runs, 0.10, 0.95));
  // sign balance: both signs inside the central 95% of Bin(n, 1/2)
  const int signed_runs = positive + negative;
  const auto lo = stats::binomial_quantile(signed_runs, 0.5, 0.025);
  const auto hi = stats::binomial_quantile(signed_runs, 0.5, 0.975);
  const bool balanced = positive >= lo && positive <= hi;
  return {flagged <= limit && balanced,
          fmt("%d/50 significant (limit %lld), Overall delta +%d/-%d (balanced range %lld..%lld), %.1fs",
              flagged, static_cast<long long>(limit), positive, negative, static_cast<long long>(lo),
              static_cast<long long>(hi), seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 8-10. directional reproduction on the standard scenario

struct DirectionalRuns {
  std::vector<exp::ReproSummary> runs;
  double seconds = 0;
};

DirectionalRuns directional_runs(int threads) {
  DirectionalRuns out;
  const auto t0 = Clock::now();
  const auto scenario = sim::ScenarioConfig::standard();
  const exp::ExperimentConfig config;
  std::printf("  seed |  A:Food  A:Cons  A:Fash   A:ETS | B:Overall C:Overall | C-B:Food C-B:Cons |"
              " Fash30 Cons30 Fash730 Cons730\n");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = exp::repro_paper_scenario(scenario, config, seed, threads);
    using events::Vertical;
    const auto& a = s.a_vs_baseline;
    const auto& b = s.b_vs_baseline;
    const auto& c = s.c_vs_baseline;
    std::printf("  %4llu | %+7.2f %+7.2f %+7.2f %+7.2f | %+9.2f %+9.2f | %+8.2f %+8.2f | %6.3f %6.3f %7.3f %7.3f\n",
                static_cast<unsigned long long>(seed), 100 * a.at(Vertical::kFood).delta,
                100 * a.at(Vertical::kConsumables).delta, 100 * a.at(Vertical::kFashion).delta,
                100 * a.at(Vertical::kEts).delta, 100 * b.overall().delta, 100 * c.overall().delta,
                100 * (c.at(Vertical::kFood).delta - b.at(Vertical::kFood).delta),
                100 * (c.at(Vertical::kConsumables).delta - b.at(Vertical::kConsumables).delta),
                s.window_share(Vertical::kFashion, 30), s.window_share(Vertical::kConsumables, 30),
                s.window_share(Vertical::kFashion, 730), s.window_share(Vertical::kConsumables, 730));
    std::fflush(stdout);
    out.runs.push_back(std::move(s));
  }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome table2_direction(const DirectionalRuns& d) {
  using events::Vertical;
  int hits = 0;
  for (const auto& s : d.runs) {
    const auto& a = s.a_vs_baseline;
    hits += a.at(Vertical::kFood).delta < 0 && a.at(Vertical::kConsumables).delta < 0 &&
            a.at(Vertical::kEts).delta > 0 && a.at(Vertical::kFashion).delta > 0;
  }
  return {hits >= 8 && d.seconds < 300.0,
          fmt("%d/10 seeds: A < Baseline in Food and Consumables, A > Baseline in ETS and Fashion; "
              "10 runs took %.0fs",
              hits, d.seconds)};
}

Outcome tables34_direction(const DirectionalRuns& d) {
  using events::Vertical;
  int overall = 0, stable = 0;
  for (const auto& s : d.runs) {
    const auto& b = s.b_vs_baseline;
    const auto& c = s.c_vs_baseline;
    overall += c.overall().delta >= b.overall().delta;
    stable += c.at(Vertical::kFood).delta >= b.at(Vertical::kFood).delta &&
              c.at(Vertical::kConsumables).delta >= b.at(Vertical::kConsumables).delta;
  }
  return {overall >= 8 && stable >= 7,
          fmt("C Overall >= B Overall in %d/10 (need 8); C >= B in both stable verticals in %d/10 "
              "(need 7)",
              overall, stable)};
}

Outcome figure1_direction(const DirectionalRuns& d) {
  using events::Vertical;
  int hits = 0;
  for (const auto& s : d.runs) {
    hits += s.window_share(Vertical::kFashion, 30) > s.window_share(Vertical::kConsumables, 30) &&
            s.window_share(Vertical::kFashion, 730) < s.window_share(Vertical::kConsumables, 730);
  }
  return {hits >= 8, fmt("%d/10 seeds: 30-day share Fashion > Consumables and 730-day share reversed", hits)};
}

// ---------------------------------------------------------------------------
// 11. model round-trip

Outcome model_round_trip() {
  std::mt19937_64 gen(1011);
  std::uniform_real_distribution<double> u(0, 1);
  ltr::RankingDataset d;
  d.feature_names = {"a", "b", "c", "d", "e"};
  for (int q = 0; q < 40; ++q) {
    ltr::QueryGroup g{"q" + std::to_string(q), {}};
    for (int i = 0; i < 15; ++i) {
      std::vector<double> f(5);
      for (auto& x : f) x = u(gen);
      const int grade = std::clamp(static_cast<int>(4 * (0.6 * f[0] + 0.4 * f[1] * f[2])), 0, 3);
      g.docs.push_back({"p" + std::to_string(i), f, grade});
    }
    d.groups.push_back(std::move(g));
  }
  ltr::TrainParams p;
  p.num_trees = 60;
  p.min_samples_leaf = 5;
  const auto model = ltr::train(d, p);
  const auto back = ltr::deserialize_model(ltr::serialize_model(model));
  int identical = 0;
  std::uniform_real_distribution<double> wide(-0.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> row(5);
    for (auto& x : row) x = wide(gen);
    identical += back.predict(row) == model.predict(row);
  }
  return {identical == 1000 && back == model, fmt("%d/1000 predictions identical after round-trip", identical)};
}

// ---------------------------------------------------------------------------
// 12. end-to-end determinism through the CLI

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const auto t0 = Clock::now();
  const auto root = fs::temp_directory_path() / ("ltrlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  int failures = 0;
  for (const char* run : {"first", "second"}) {
    const std::string cmd = std::string(LTRLAB_CLI_PATH) + " --seed 7 --out-dir " + (root / run).string() +
                            " repro > /dev/null";
    const int raw = std::system(cmd.c_str());
    failures += !(WIFEXITED(raw) && WEXITSTATUS(raw) == 0);
  }
  const auto m1 = slurp(root / "first" / "manifest.json"), m2 = slurp(root / "second" / "manifest.json");
  const auto s1 = slurp(root / "first" / "summary.txt"), s2 = slurp(root / "second" / "summary.txt");
  const auto d1 = slurp(root / "first" / "directional.csv"), d2 = slurp(root / "second" / "directional.csv");
  fs::remove_all(root);
  const bool same = failures == 0 && !m1.empty() && m1 == m2 && !s1.empty() && s1 == s2 && d1 == d2;
  return {same, fmt("two `--seed 7 repro` runs: exit failures %d, manifest %s, summary %s, %.0fs", failures,
                    m1 == m2 ? "identical" : "differs", s1 == s2 ? "identical" : "differs", seconds_since(t0))};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&failed](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %s: %s (%s)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report(1, "feature oracle", feature_oracle());
  report(2, "incremental equivalence", incremental_equivalence());
  report(3, "cold start", cold_start());
  report(4, "lambda gradients", lambda_check());
  report(5, "NDCG cases", ndcg_cases());
  report(6, "trainer sanity", trainer_sanity());
  report(7, "A/A calibration", aa_calibration());
  const auto runs = directional_runs(1);
  report(8, "Model A direction", table2_direction(runs));
  report(9, "Model C vs B", tables34_direction(runs));
  report(10, "tree adjacency direction", figure1_direction(runs));
  report(11, "model round-trip", model_round_trip());
  report(12, "CLI determinism", cli_determinism());
  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
