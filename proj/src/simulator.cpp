#include "ltrlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "ltrlab/error.hpp"
#include "ltrlab/parallel.hpp"
#include "ltrlab/svmlight.hpp"

namespace ltrlab::sim {

namespace {

// Stream ids keep world generation and each query's traffic independent.
constexpr std::uint64_t kWorldStream = 0x574f524c44;  // "WORLD"
constexpr std::uint64_t kTrafficStream = 0x54524146;  // "TRAF"

double logit(double p) {
  const double clamped = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(clamped / (1.0 - clamped));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string query_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%04zu", index);
  return buf;
}

std::string product_id(const std::string& query, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-p%04zu", index);
  return query + buf;
}

}  // namespace

Propensities World::affinity(std::size_t q, std::size_t p, int day) const {
  const auto& product = queries_[q].products[p];
  if (day < product.arrival_day || day >= horizon()) {
    throw ContractError("affinity: product " + product.id + " does not exist on day " +
                        std::to_string(day));
  }
  const auto& t = trajectories_[q][p];
  const auto i = static_cast<std::size_t>(day - product.arrival_day);
  Propensities out;
  out.click = sigmoid(t.click[i]);
  out.atc = out.click * sigmoid(t.atc_given_click[i]);
  out.order = out.atc * sigmoid(t.order_given_atc[i]);
  return out;
}

double World::click_logit(std::size_t q, std::size_t p, int day) const {
  const auto& product = queries_[q].products[p];
  return trajectories_[q][p].click[static_cast<std::size_t>(day - product.arrival_day)];
}

std::vector<std::size_t> World::candidates(std::size_t q, int day) const {
  std::vector<std::size_t> out;
  const auto& products = queries_[q].products;
  for (std::size_t p = 0; p < products.size(); ++p) {
    if (products[p].arrival_day <= day) out.push_back(p);
  }
  return out;
}

events::VerticalLabelMap World::labels() const {
  events::VerticalLabelMap labels;
  for (const auto& q : queries_) labels.set(q.id, q.vertical);
  return labels;
}

void World::write_snapshot_csv(std::ostream& out, int day) const {
  out << "query_id,product_id,vertical,arrival_date,date,click,atc,order\n";
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    for (std::size_t p : candidates(q, day)) {
      const auto a = affinity(q, p, day);
      out << queries_[q].id << ',' << queries_[q].products[p].id << ','
          << events::to_string(queries_[q].vertical) << ','
          << format_day(date(queries_[q].products[p].arrival_day)) << ',' << format_day(date(day))
          << ',' << ltr::format_double(a.click) << ',' << ltr::format_double(a.atc) << ','
          << ltr::format_double(a.order) << '\n';
    }
  }
}

World generate_world(const ScenarioConfig& config) {
  config.validate();
  World world;
  world.config_ = config;
  Rng rng(derive_seed(config.seed, kWorldStream));
  const int horizon = config.horizon_days;

  std::size_t q_index = 0;
  for (int i = 0; i < config.queries_per_vertical; ++i) {
    for (auto vertical : events::kAllVerticals) {
      QueryInfo query;
      query.id = query_id(q_index++);
      query.vertical = vertical;
      const auto& dyn = config.dynamics(vertical);
      std::vector<World::Trajectory> trajectories;

      auto add_product = [&](int arrival) {
        Product product{product_id(query.id, query.products.size()), arrival};
        World::Trajectory t;
        const auto length = static_cast<std::size_t>(horizon - arrival);
        double c = logit(rng.uniform(dyn.click.lo, dyn.click.hi));
        double a = logit(rng.uniform(dyn.atc_given_click.lo, dyn.atc_given_click.hi));
        double o = logit(rng.uniform(dyn.order_given_atc.lo, dyn.order_given_atc.hi));
        t.click.reserve(length);
        t.atc_given_click.reserve(length);
        t.order_given_atc.reserve(length);
        for (std::size_t d = 0; d < length; ++d) {
          if (d > 0 && dyn.drift_rate > 0.0) {
            c += dyn.drift_rate * rng.normal();
            a += dyn.drift_rate * rng.normal();
            o += dyn.drift_rate * rng.normal();
          }
          t.click.push_back(c);
          t.atc_given_click.push_back(a);
          t.order_given_atc.push_back(o);
        }
        query.products.push_back(std::move(product));
        trajectories.push_back(std::move(t));
      };

      for (int p = 0; p < config.products_per_query; ++p) add_product(0);
      if (dyn.new_product_rate > 0.0) {
        for (int day = 1; day < horizon; ++day) {
          if (rng.bernoulli(dyn.new_product_rate)) add_product(day);
        }
      }
      world.queries_.push_back(std::move(query));
      world.trajectories_.push_back(std::move(trajectories));
    }
  }
  return world;
}

bool SimulatedSession::any_engagement() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.clicked; });
}

bool SimulatedSession::any_atc() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.atc; });
}

std::vector<PositionOutcome> simulate_outcomes(std::span<const Propensities> ranked,
                                               const UserModel& user, Rng& rng) {
  std::vector<PositionOutcome> outcomes(ranked.size());
  const std::size_t shown = std::min(ranked.size(), static_cast<std::size_t>(user.page_length));
  // Four draws per shown position whatever the outcome, so two rankings
  // simulated from equal seeds stay on common random numbers.
  for (std::size_t i = 0; i < shown; ++i) {
    auto& o = outcomes[i];
    const auto& p = ranked[i];
    const double u_examine = rng.uniform();
    const double u_click = rng.uniform();
    const double u_atc = rng.uniform();
    const double u_order = rng.uniform();
    o.examined = u_examine < user.examination(static_cast<int>(i) + 1);
    o.clicked = o.examined && u_click < p.click;
    o.atc = o.clicked && u_atc < p.atc / p.click;
    o.ordered = o.atc && u_order < p.order / p.atc;
  }
  return outcomes;
}

SimulatedSession simulate_session(std::string_view query_id, Day day,
                                  std::span<const std::string> ranking,
                                  std::span<const Propensities> affinity, const UserModel& user,
                                  Rng& rng) {
  if (ranking.size() != affinity.size()) {
    throw ContractError("simulate_session: ranking and affinities differ in length");
  }
  SimulatedSession session;
  session.query_id = std::string(query_id);
  session.day = day;
  session.shown.assign(ranking.begin(), ranking.end());
  session.outcomes = simulate_outcomes(affinity, user, rng);
  return session;
}

Ranker noisy_affinity_ranker(const World& world, double noise) {
  return [&world, noise](std::size_t q, int day, Rng& rng) {
    auto candidates = world.candidates(q, day);
    std::vector<double> keys(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      keys[i] = world.click_logit(q, candidates[i], day) + noise * rng.normal();
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
    std::vector<std::size_t> ranking;
    ranking.reserve(order.size());
    for (std::size_t i : order) ranking.push_back(candidates[i]);
    return ranking;
  };
}

std::vector<events::EngagementEvent> generate_event_log(const World& world, const Ranker& ranker,
                                                        int first_day, int last_day,
                                                        std::uint64_t seed, int threads) {
  if (first_day < 0 || last_day >= world.horizon()) {
    throw ContractError("generate_event_log: day range outside the world horizon");
  }
  const auto& queries = world.queries();
  const auto& config = world.config();
  const int num_days = std::max(0, last_day - first_day + 1);
  const std::array<int, 2> sessions{config.web_sessions_per_day, config.app_sessions_per_day};

  std::vector<std::vector<events::EngagementEvent>> per_query(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    const auto& query = queries[q];
    const std::size_t num_products = query.products.size();
    // counts[(product * 2 + source) * num_days + day]
    std::vector<events::Counts> counts(num_products * 2 * static_cast<std::size_t>(num_days));
    std::array<Rng, 2> rngs{Rng(derive_seed(seed, kTrafficStream + 2 * q)),
                            Rng(derive_seed(seed, kTrafficStream + 2 * q + 1))};
    std::vector<Propensities> props;
    std::vector<Propensities> by_product(num_products);
    for (int d = 0; d < num_days; ++d) {
      const int day = first_day + d;
      for (std::size_t p : world.candidates(q, day)) by_product[p] = world.affinity(q, p, day);
      for (std::size_t s = 0; s < 2; ++s) {
        for (int n = 0; n < sessions[s]; ++n) {
          const auto ranking = ranker(q, day, rngs[s]);
          props.clear();
          for (std::size_t p : ranking) props.push_back(by_product[p]);
          const auto outcomes = simulate_outcomes(props, config.user, rngs[s]);
          for (std::size_t i = 0; i < ranking.size(); ++i) {
            const auto& o = outcomes[i];
            if (!o.examined) continue;
            auto& c = counts[(ranking[i] * 2 + s) * static_cast<std::size_t>(num_days) +
                             static_cast<std::size_t>(d)];
            ++c.examines;
            c.clicks += o.clicked;
            c.atcs += o.atc;
            c.orders += o.ordered;
          }
        }
      }
    }
    // Product ids and source order are already canonical, so emitting in
    // (product, source, day) order yields a sorted log.
    auto& out = per_query[q];
    for (std::size_t p = 0; p < num_products; ++p) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (int d = 0; d < num_days; ++d) {
          const auto& c = counts[(p * 2 + s) * static_cast<std::size_t>(num_days) +
                                 static_cast<std::size_t>(d)];
          if (c.examines == 0) continue;
          out.push_back({query.id, query.products[p].id, events::kAllSources[s],
                         world.date(first_day + d), c});
        }
      }
    }
  });

  std::vector<events::EngagementEvent> log;
  std::size_t total = 0;
  for (const auto& v : per_query) total += v.size();
  log.reserve(total);
  for (auto& v : per_query) std::move(v.begin(), v.end(), std::back_inserter(log));
  return log;
}

}  // namespace ltrlab::sim
