#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ltrlab/error.hpp"
#include "ltrlab/gbdt.hpp"
#include "ltrlab/ranking_metrics.hpp"
#include "ltrlab/svmlight.hpp"

using namespace ltrlab;
using namespace ltrlab::ltr;

namespace {

constexpr double kEps = 1e-6;

struct Stump {
  bool split = false;
  int feature = -1;
  double threshold = 0;
  double left = 0, right = 0, leaf = 0;
};

// Enumerates every (feature, midpoint) pair and keeps the best gain.
Stump stump_oracle(const DenseMatrix& x, const std::vector<double>& g, const std::vector<double>& h,
                   int min_leaf) {
  const std::size_t n = x.rows();
  double G = 0, H = 0;
  for (std::size_t i = 0; i < n; ++i) {
    G += g[i];
    H += h[i];
  }
  Stump best;
  best.leaf = G / (H + kEps);
  double best_gain = 1e-12;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::set<double> values;
    for (std::size_t i = 0; i < n; ++i) values.insert(x.at(i, f));
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t t = 0; t + 1 < v.size(); ++t) {
      const double thr = v[t] + (v[t + 1] - v[t]) / 2;
      double gl = 0, hl = 0;
      int nl = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x.at(i, f) < thr) {
          gl += g[i];
          hl += h[i];
          ++nl;
        }
      }
      if (nl < min_leaf || static_cast<int>(n) - nl < min_leaf) continue;
      const double gr = G - gl, hr = H - hl;
      const double gain = gl * gl / (hl + kEps) + gr * gr / (hr + kEps) - G * G / (H + kEps);
      if (gain > best_gain * (1 + 1e-9)) {
        best_gain = gain;
        best = {true, static_cast<int>(f), thr, gl / (hl + kEps), gr / (hr + kEps), 0};
      }
    }
  }
  return best;
}

TrainParams stump_params(int min_leaf = 1) {
  TrainParams p;
  p.max_depth = 1;
  p.min_samples_leaf = min_leaf;
  return p;
}

RankingDataset synthetic(std::uint64_t seed, int groups, int docs, int cols, double noise) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z(0, noise);
  RankingDataset d;
  for (int c = 0; c < cols; ++c) d.feature_names.push_back("f" + std::to_string(c));
  for (int q = 0; q < groups; ++q) {
    QueryGroup group{"q" + std::to_string(q), {}};
    for (int i = 0; i < docs; ++i) {
      Document doc{"p" + std::to_string(i), std::vector<double>(cols), 0};
      for (auto& v : doc.features) v = u(gen);
      const double latent = doc.features[0] + 0.5 * doc.features[1] + z(gen);
      doc.grade = std::clamp(static_cast<int>(latent * 2.7), 0, 3);
      group.docs.push_back(std::move(doc));
    }
    d.groups.push_back(std::move(group));
  }
  return d;
}

double naive_predict(const GbdtModel& m, const std::vector<double>& row) {
  double s = m.base_score;
  for (const auto& t : m.trees) {
    int i = 0;
    for (;;) {
      const auto& n = t.nodes[i];
      if (n.feature < 0) {
        s += m.learning_rate * n.value;
        break;
      }
      i = row[n.feature] < n.threshold ? n.left : n.right;
    }
  }
  return s;
}

std::vector<std::size_t> model_order(const GbdtModel& m, const QueryGroup& g) {
  std::vector<double> scores;
  for (const auto& d : g.docs) scores.push_back(m.predict(d.features));
  return rank_by_score(scores);
}

}  // namespace

TEST_CASE("stump on separated gradients") {
  DenseMatrix x(6, 2);
  const double f0[] = {0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  const double f1[] = {0.5, 0.1, 0.9, 0.2, 0.6, 0.4};
  for (int i = 0; i < 6; ++i) {
    x.at(i, 0) = f0[i];
    x.at(i, 1) = f1[i];
  }
  const std::vector<double> g{-1, -1, -1, 1, 1, 1}, h(6, 0.5);
  const auto tree = fit_tree(x, g, h, stump_params());
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5));
  CHECK(tree.nodes[tree.nodes[0].left].value == doctest::Approx(-3 / (1.5 + kEps)));
  CHECK(tree.nodes[tree.nodes[0].right].value == doctest::Approx(3 / (1.5 + kEps)));
}

TEST_CASE("stumps match exhaustive split enumeration") {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> z(0, 1);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 12 + trial % 20, cols = 1 + trial % 4, min_leaf = 1 + trial % 4;
    DenseMatrix x(n, cols);
    std::vector<double> g(n), h(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < cols; ++c) x.at(i, c) = level(gen) / 2.0;  // many ties
      g[i] = z(gen);
      h[i] = std::abs(z(gen)) + 0.01;
    }
    const auto oracle = stump_oracle(x, g, h, min_leaf);
    const auto tree = fit_tree(x, g, h, stump_params(min_leaf));
    if (!oracle.split) {
      REQUIRE(tree.nodes.size() == 1);
      CHECK(tree.nodes[0].value == doctest::Approx(oracle.leaf));
      continue;
    }
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == oracle.feature);
    CHECK(tree.nodes[0].threshold == doctest::Approx(oracle.threshold));
    CHECK(tree.nodes[tree.nodes[0].left].value == doctest::Approx(oracle.left));
    CHECK(tree.nodes[tree.nodes[0].right].value == doctest::Approx(oracle.right));
  }
}

TEST_CASE("zero gradients give a zero leaf") {
  DenseMatrix x(10, 2);
  for (int i = 0; i < 10; ++i) x.at(i, 0) = x.at(i, 1) = i;
  const auto tree = fit_tree(x, std::vector<double>(10, 0.0), std::vector<double>(10, 1.0),
                             TrainParams{});
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].value == 0.0);
}

TEST_CASE("identical columns tie-break to the lowest index") {
  DenseMatrix x(8, 3);
  for (int i = 0; i < 8; ++i) {
    x.at(i, 0) = 0.0;
    x.at(i, 1) = x.at(i, 2) = i < 4 ? 0.0 : 1.0;
  }
  const std::vector<double> g{1, 1, 1, 1, -1, -1, -1, -1}, h(8, 1.0);
  const auto tree = fit_tree(x, g, h, stump_params());
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 1);
}

TEST_CASE("depth and leaf size limits hold") {
  const auto d = synthetic(42, 30, 20, 4, 0.2);
  TrainParams p;
  p.num_trees = 10;
  p.max_depth = 3;
  p.min_samples_leaf = 15;
  const auto m = train(d, p);
  for (const auto& t : m.trees) {
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, depth] = stack.back();
      stack.pop_back();
      CHECK(depth <= 3);
      if (!t.nodes[i].is_leaf()) {
        stack.emplace_back(t.nodes[i].left, depth + 1);
        stack.emplace_back(t.nodes[i].right, depth + 1);
      }
    }
  }
  // every leaf holds at least min_samples_leaf training rows
  for (const auto& t : m.trees) {
    std::vector<int> hits(t.nodes.size(), 0);
    for (const auto& g : d.groups) {
      for (const auto& doc : g.docs) {
        int i = 0;
        while (!t.nodes[i].is_leaf()) {
          i = doc.features[t.nodes[i].feature] < t.nodes[i].threshold ? t.nodes[i].left
                                                                        : t.nodes[i].right;
        }
        ++hits[i];
      }
    }
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      if (t.nodes[i].is_leaf()) CHECK(hits[i] >= 15);
    }
  }
}

TEST_CASE("separable data is learned") {
  RankingDataset d;
  d.feature_names = {"grade", "noise"};
  std::mt19937_64 gen(43);
  std::uniform_int_distribution<int> grade(0, 3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int q = 0; q < 40; ++q) {
    QueryGroup g{"q" + std::to_string(q), {}};
    for (int i = 0; i < 10; ++i) {
      const int gr = grade(gen);
      g.docs.push_back({"p" + std::to_string(i), {static_cast<double>(gr), u(gen)}, gr});
    }
    d.groups.push_back(g);
  }
  TrainParams p;
  p.num_trees = 20;
  TrainingLog log;
  const auto m = train(d, p, &log);
  CHECK(log.train_ndcg.size() == 20);
  CHECK(log.k == 10);
  // independent: rank by model, score each group with the formula
  double total = 0;
  for (const auto& g : d.groups) {
    std::vector<int> ranked;
    for (auto i : model_order(m, g)) ranked.push_back(g.docs[i].grade);
    total += ndcg_at_k(ranked, 10);
  }
  CHECK(total / 40 >= 0.99);
  CHECK(evaluate_ndcg(m, d, 10) == doctest::Approx(total / 40));
  CHECK(log.train_ndcg.back() == doctest::Approx(total / 40));
}

TEST_CASE("zero rounds predict base_score everywhere") {
  const auto d = synthetic(44, 3, 5, 2, 0.1);
  TrainParams p;
  p.num_trees = 0;
  const auto m = train(d, p);
  CHECK(m.trees.empty());
  for (const auto& g : d.groups) {
    for (const auto& doc : g.docs) CHECK(m.predict(doc.features) == m.base_score);
    const auto order = model_order(m, g);
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
  }
}

TEST_CASE("training is deterministic") {
  const auto d = synthetic(45, 20, 12, 5, 0.3);
  TrainParams p;
  p.num_trees = 15;
  CHECK(serialize_model(train(d, p)) == serialize_model(train(d, p)));
}

TEST_CASE("predict matches a naive per-tree traversal") {
  const auto d = synthetic(46, 25, 15, 4, 0.3);
  TrainParams p;
  p.num_trees = 30;
  p.min_samples_leaf = 5;
  const auto m = train(d, p);
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> row(4);
    for (auto& v : row) v = u(gen);
    CHECK(m.predict(row) == doctest::Approx(naive_predict(m, row)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(m.predict(std::vector<double>(3)), ContractError);
}

TEST_CASE("single stump routes left") {
  GbdtModel m;
  m.feature_names = {"a"};
  m.base_score = 0.5;
  m.learning_rate = 0.1;
  m.trees.push_back({{{0, 1.0, 1, 2, 0}, {-1, 0, -1, -1, -2.0}, {-1, 0, -1, -1, 3.0}}});
  CHECK(m.predict(std::vector<double>{0.2}) == doctest::Approx(0.5 - 0.2));
  CHECK(m.predict(std::vector<double>{1.0}) == doctest::Approx(0.5 + 0.3));
}

TEST_CASE("model serialization round-trips") {
  const auto d = synthetic(48, 20, 10, 3, 0.3);
  TrainParams p;
  p.num_trees = 12;
  p.min_samples_leaf = 3;
  const auto m = train(d, p);
  const auto text = serialize_model(m);
  const auto back = deserialize_model(text);
  CHECK(back == m);
  CHECK(serialize_model(back) == text);
  std::mt19937_64 gen(49);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> row{u(gen), u(gen), u(gen)};
    CHECK(back.predict(row) == m.predict(row));
  }
  CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), ParseError);
}

TEST_CASE("schema errors name the offending path") {
  auto message = [](const std::string& text) {
    try {
      (void)deserialize_model(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string head = R"({"feature_names":["a"],"base_score":0,"learning_rate":0.1,"trees":)";
  CHECK(message(head + R"([{"nodes":[{"v":1}]},{"nodes":[{"f":0,"t":1,"l":1,"r":9},{"v":0},{"v":1}]}]})")
            .find("trees[1].nodes[0].r") != std::string::npos);
  CHECK(message(head + R"([{"nodes":[{"f":3,"t":1,"l":1,"r":2},{"v":0},{"v":1}]}]})")
            .find("trees[0].nodes[0].f") != std::string::npos);
  CHECK(message(head + R"([{"nodes":[{"f":0,"t":1,"l":1,"r":1},{"v":0}]}]})").find("two parents") !=
        std::string::npos);
  CHECK(message(head + R"([{"nodes":[{"v":"x"}]}]})").find("nodes[0].v") != std::string::npos);
  CHECK(message(R"({"feature_names":["a"],"learning_rate":0.1,"trees":[]})").find("base_score") !=
        std::string::npos);
}

TEST_CASE("train rejects empty and invalid datasets") {
  RankingDataset empty;
  empty.feature_names = {"a"};
  CHECK_THROWS_AS(train(empty, {}), ContractError);
  RankingDataset one;
  one.feature_names = {"a"};
  one.groups.push_back({"q", {{"p", {0.0}, 1}}});
  CHECK_THROWS_AS(train(one, {}), ContractError);
  auto bad = synthetic(50, 2, 3, 2, 0.1);
  bad.groups[1].docs[0].grade = 4;
  CHECK_THROWS_AS(train(bad, {}), ContractError);
  TrainParams p;
  p.learning_rate = 0;
  CHECK_THROWS_AS(train(synthetic(51, 2, 3, 2, 0.1), p), ContractError);
}

TEST_CASE("training NDCG improves from round 1 to round 50 across seeds") {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = synthetic(100 + seed, 15, 12, 4, 0.4);
    TrainParams p;
    p.num_trees = 50;
    p.min_samples_leaf = 5;
    p.seed = seed;
    TrainingLog log;
    (void)train(d, p, &log);
    if (log.train_ndcg[49] >= log.train_ndcg[0]) ++improved;
  }
  CHECK(improved >= 19);
}

TEST_CASE("scaling a column leaves rankings unchanged") {
  const auto d = synthetic(52, 20, 12, 3, 0.3);
  auto scaled = d;
  for (auto& g : scaled.groups) {
    for (auto& doc : g.docs) doc.features[1] *= 3.0;
  }
  TrainParams p;
  p.num_trees = 20;
  p.min_samples_leaf = 4;
  const auto a = train(d, p), b = train(scaled, p);
  for (std::size_t q = 0; q < d.groups.size(); ++q) {
    CHECK(model_order(a, d.groups[q]) == model_order(b, scaled.groups[q]));
  }
}

TEST_CASE("svmlight export round-trips") {
  auto d = synthetic(53, 4, 5, 3, 0.3);
  d.groups[2].docs[1].features[2] = 0.0;
  std::ostringstream out, side;
  write_svmlight(out, d);
  write_feature_sidecar(side, d.feature_names);
  CHECK(side.str() == "index,feature_name\n1,f0\n2,f1\n3,f2\n");
  std::istringstream side_in(side.str());
  const auto names = read_feature_sidecar(side_in);
  CHECK(names == d.feature_names);
  std::istringstream in(out.str());
  const auto back = read_svmlight(in, names);
  REQUIRE(back.groups.size() == d.groups.size());
  for (std::size_t q = 0; q < d.groups.size(); ++q) {
    CHECK(back.groups[q].query_id == d.groups[q].query_id);
    REQUIRE(back.groups[q].docs.size() == d.groups[q].docs.size());
    for (std::size_t i = 0; i < d.groups[q].docs.size(); ++i) {
      CHECK(back.groups[q].docs[i].product_id == d.groups[q].docs[i].product_id);
      CHECK(back.groups[q].docs[i].grade == d.groups[q].docs[i].grade);
      CHECK(back.groups[q].docs[i].features == d.groups[q].docs[i].features);
    }
  }
  std::istringstream broken("1 qid:1 1:x # q=a p=b\n");
  CHECK_THROWS_AS(read_svmlight(broken, names), ParseError);
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456.789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
