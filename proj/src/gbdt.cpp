#include "ltrlab/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <utility>

#include <json.hpp>

#include "ltrlab/error.hpp"
#include "ltrlab/ranking_metrics.hpp"

namespace ltrlab::ltr {

namespace {

using nlohmann::json;

// Splits whose gain is below this are rounding noise (e.g. a split separating
// whole query groups, whose lambdas sum to zero).
constexpr double kMinSplitGain = 1e-12;

double leaf_value(double g, double h) { return g / (h + kHessianEpsilon); }

double score_term(double g, double h) { return g * g / (h + kHessianEpsilon); }

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = kMinSplitGain;
};

// Exact greedy builder over presorted columns. Each node owns the same
// contiguous range [begin, end) in every per-feature order array; splitting
// stable-partitions all of them, so per-node orders stay sorted.
class TreeBuilder {
 public:
  TreeBuilder(const DenseMatrix& x, std::span<const double> g, std::span<const double> h,
              const TrainParams& params, std::vector<std::vector<std::uint32_t>> order)
      : x_(x), g_(g), h_(h), params_(params), order_(std::move(order)), gh_(x.rows()),
        sorted_(order_.size()), goes_left_(x.rows(), 0), scratch_(x.rows()),
        scratch_values_(x.rows()) {
    for (std::size_t r = 0; r < x.rows(); ++r) gh_[r] = {g[r], h[r]};
    // values laid out in each feature's sort order, partitioned alongside it
    for (std::size_t f = 0; f < order_.size(); ++f) {
      sorted_[f].resize(x.rows());
      for (std::size_t i = 0; i < x.rows(); ++i) sorted_[f][i] = x.at(order_[f][i], f);
    }
  }

  Tree build() {
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    grow(0, 0, x_.rows(), 0);
    return std::move(tree_);
  }

 private:
  void grow(int node, std::size_t begin, std::size_t end, int depth) {
    double g_total = 0.0;
    double h_total = 0.0;
    const auto& rows = order_.empty() ? identity() : order_[0];
    for (std::size_t i = begin; i < end; ++i) {
      g_total += gh_[rows[i]].first;
      h_total += gh_[rows[i]].second;
    }
    const std::size_t n = end - begin;
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    Split best;
    if (depth < params_.max_depth && n >= 2 * min_leaf && !order_.empty()) {
      best = find_split(begin, end, g_total, h_total);
    }
    if (best.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(node)].value = leaf_value(g_total, h_total);
      return;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    for (std::size_t i = begin; i < end; ++i) {
      goes_left_[order_[f][i]] = sorted_[f][i] < best.threshold ? 1 : 0;
    }
    std::size_t mid = begin;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      auto& ord = order_[k];
      auto& vals = sorted_[k];
      std::size_t left = begin;
      std::size_t right_count = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = ord[i];
        if (goes_left_[r]) {
          vals[left] = vals[i];
          ord[left++] = r;
        } else {
          scratch_values_[right_count] = vals[i];
          scratch_[right_count++] = r;
        }
      }
      std::copy_n(scratch_.begin(), right_count, ord.begin() + static_cast<long>(left));
      std::copy_n(scratch_values_.begin(), right_count, vals.begin() + static_cast<long>(left));
      mid = left;
    }

    const int left_child = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right_child = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    auto& parent = tree_.nodes[static_cast<std::size_t>(node)];
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = left_child;
    parent.right = right_child;
    grow(left_child, begin, mid, depth + 1);
    grow(right_child, mid, end, depth + 1);
  }

  Split find_split(std::size_t begin, std::size_t end, double g_total, double h_total) const {
    Split best;
    const double parent_score = score_term(g_total, h_total);
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const std::size_t n = end - begin;
    for (std::size_t f = 0; f < order_.size(); ++f) {
      const auto& ord = order_[f];
      const auto& vals = sorted_[f];
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const auto& [gr, hr] = gh_[ord[i]];
        gl += gr;
        hl += hr;
        const std::size_t n_left = i - begin + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        const double v = vals[i];
        const double v_next = vals[i + 1];
        if (!(v < v_next)) continue;
        const double gain = score_term(gl, hl) + score_term(g_total - gl, h_total - hl) -
                            parent_score;
        if (gain > best.gain) {
          double threshold = v + (v_next - v) / 2.0;
          if (!(threshold > v)) threshold = v_next;
          best = Split{static_cast<int>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  const std::vector<std::uint32_t>& identity() {
    if (identity_.size() != x_.rows()) {
      identity_.resize(x_.rows());
      std::iota(identity_.begin(), identity_.end(), 0u);
    }
    return identity_;
  }

  const DenseMatrix& x_;
  std::span<const double> g_;
  std::span<const double> h_;
  const TrainParams& params_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::pair<double, double>> gh_;
  std::vector<std::vector<double>> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<double> scratch_values_;
  std::vector<std::uint32_t> identity_;
  Tree tree_;
};

std::vector<std::vector<std::uint32_t>> presort(const DenseMatrix& x) {
  std::vector<std::vector<std::uint32_t>> order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& ord = order[f];
    ord.resize(x.rows());
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
  }
  return order;
}

Tree fit_presorted(const DenseMatrix& x, std::span<const double> g, std::span<const double> h,
                   const TrainParams& params, std::vector<std::vector<std::uint32_t>> order) {
  return TreeBuilder(x, g, h, params, std::move(order)).build();
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ParseError("model: " + path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing");
  return *it;
}

double require_number(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

int require_index(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer()) schema_error(path + "." + key, "expected an integer");
  return v.get<int>();
}

}  // namespace

void RankingDataset::validate() const {
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& group = groups[gi];
    if (group.docs.size() < 2) {
      throw ContractError("group '" + group.query_id + "' has fewer than 2 documents");
    }
    for (const auto& doc : group.docs) {
      if (doc.grade < 0 || doc.grade > 3) {
        throw ContractError("group '" + group.query_id + "': grade " +
                            std::to_string(doc.grade) + " outside 0..3");
      }
      if (doc.features.size() != feature_names.size()) {
        throw ContractError("group '" + group.query_id + "': row has " +
                            std::to_string(doc.features.size()) + " values, expected " +
                            std::to_string(feature_names.size()));
      }
    }
  }
}

std::size_t RankingDataset::num_docs() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.docs.size();
  return n;
}

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] < node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].value;
}

void TrainParams::validate() const {
  if (num_trees < 0 || max_depth < 1 || min_samples_leaf < 1 || !(learning_rate > 0.0) ||
      !(sigma > 0.0) || ndcg_k < 1) {
    throw ContractError(
        "train params: need num_trees >= 0, max_depth >= 1, min_samples_leaf >= 1, "
        "learning_rate > 0, sigma > 0, ndcg_k >= 1");
  }
}

double GbdtModel::predict(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw ContractError("predict: row has " + std::to_string(row.size()) +
                        " values, model expects " + std::to_string(feature_names.size()));
  }
  double score = base_score;
  for (const auto& tree : trees) score += learning_rate * tree.predict(row);
  return score;
}

Tree fit_tree(const DenseMatrix& features, std::span<const double> gradients,
              std::span<const double> hessians, const TrainParams& params) {
  if (gradients.size() != features.rows() || hessians.size() != features.rows()) {
    throw ContractError("fit_tree: gradient/hessian length differs from row count");
  }
  params.validate();
  return fit_presorted(features, gradients, hessians, params, presort(features));
}

void TrainingLog::write_csv(std::ostream& out) const {
  out << "round,train_ndcg_at_k\n";
  char buf[64];
  for (std::size_t r = 0; r < train_ndcg.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f\n", r + 1, train_ndcg[r]);
    out << buf;
  }
}

GbdtModel train(const RankingDataset& dataset, const TrainParams& params, TrainingLog* log) {
  params.validate();
  if (dataset.groups.empty()) throw ContractError("train: empty dataset");
  dataset.validate();

  const std::size_t rows = dataset.num_docs();
  const std::size_t cols = dataset.feature_names.size();
  DenseMatrix x(rows, cols);
  std::vector<int> grades(rows);
  std::vector<std::size_t> offsets{0};
  {
    std::size_t r = 0;
    for (const auto& group : dataset.groups) {
      for (const auto& doc : group.docs) {
        for (std::size_t c = 0; c < cols; ++c) x.at(r, c) = doc.features[c];
        grades[r] = doc.grade;
        ++r;
      }
      offsets.push_back(r);
    }
  }

  GbdtModel model;
  model.feature_names = dataset.feature_names;
  model.base_score = 0.0;
  model.learning_rate = params.learning_rate;

  const auto order = presort(x);
  std::vector<double> scores(rows, model.base_score);
  std::vector<double> g(rows);
  std::vector<double> h(rows);
  if (log != nullptr) {
    log->k = params.ndcg_k;
    log->train_ndcg.clear();
  }

  for (int round = 0; round < params.num_trees; ++round) {
    for (std::size_t gi = 0; gi + 1 < offsets.size(); ++gi) {
      const std::size_t b = offsets[gi];
      const std::size_t n = offsets[gi + 1] - b;
      auto lr = lambda_gradients(std::span(scores).subspan(b, n),
                                 std::span<const int>(grades).subspan(b, n), params.sigma,
                                 params.ndcg_k);
      std::copy(lr.lambdas.begin(), lr.lambdas.end(), g.begin() + static_cast<long>(b));
      std::copy(lr.hessians.begin(), lr.hessians.end(), h.begin() + static_cast<long>(b));
    }
    Tree tree = fit_presorted(x, g, h, params, order);
    for (std::size_t r = 0; r < rows; ++r) scores[r] += model.learning_rate * tree.predict(x.row(r));
    model.trees.push_back(std::move(tree));

    if (log != nullptr) {
      double total = 0.0;
      for (std::size_t gi = 0; gi + 1 < offsets.size(); ++gi) {
        const std::size_t b = offsets[gi];
        const std::size_t n = offsets[gi + 1] - b;
        total += group_ndcg(std::span(scores).subspan(b, n),
                            std::span<const int>(grades).subspan(b, n), params.ndcg_k);
      }
      log->train_ndcg.push_back(total / static_cast<double>(offsets.size() - 1));
    }
  }
  return model;
}

double evaluate_ndcg(const GbdtModel& model, const RankingDataset& dataset, int k) {
  if (dataset.groups.empty()) throw ContractError("evaluate_ndcg: empty dataset");
  double total = 0.0;
  for (const auto& group : dataset.groups) {
    std::vector<double> scores;
    std::vector<int> grades;
    for (const auto& doc : group.docs) {
      scores.push_back(model.predict(doc.features));
      grades.push_back(doc.grade);
    }
    total += group_ndcg(scores, grades, k);
  }
  return total / static_cast<double>(dataset.groups.size());
}

std::string serialize_model(const GbdtModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"v", node.value}});
      } else {
        nodes.push_back(
            {{"f", node.feature}, {"t", node.threshold}, {"l", node.left}, {"r", node.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  json out = {{"feature_names", model.feature_names},
              {"base_score", model.base_score},
              {"learning_rate", model.learning_rate},
              {"trees", std::move(trees)}};
  return out.dump() + "\n";
}

GbdtModel deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("model: not valid JSON: ") + err.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");

  GbdtModel model;
  const auto& names = require(doc, "feature_names", "$");
  if (!names.is_array()) schema_error("$.feature_names", "expected an array");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string()) {
      schema_error("$.feature_names[" + std::to_string(i) + "]", "expected a string");
    }
    model.feature_names.push_back(names[i].get<std::string>());
  }
  model.base_score = require_number(doc, "base_score", "$");
  model.learning_rate = require_number(doc, "learning_rate", "$");
  if (!(model.learning_rate > 0.0)) schema_error("$.learning_rate", "must be positive");

  const auto& trees = require(doc, "trees", "$");
  if (!trees.is_array()) schema_error("$.trees", "expected an array");
  const int num_features = static_cast<int>(model.feature_names.size());
  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    const std::string tree_path = "trees[" + std::to_string(ti) + "]";
    if (!trees[ti].is_object()) schema_error(tree_path, "expected an object");
    const auto& nodes = require(trees[ti], "nodes", tree_path);
    if (!nodes.is_array() || nodes.empty()) {
      schema_error(tree_path + ".nodes", "expected a non-empty array");
    }
    Tree tree;
    const int count = static_cast<int>(nodes.size());
    std::vector<int> parents(nodes.size(), 0);
    for (int ni = 0; ni < count; ++ni) {
      const std::string path = tree_path + ".nodes[" + std::to_string(ni) + "]";
      const auto& n = nodes[static_cast<std::size_t>(ni)];
      if (!n.is_object()) schema_error(path, "expected an object");
      TreeNode node;
      if (n.contains("v")) {
        if (n.contains("f")) schema_error(path, "node is both leaf and split");
        node.value = require_number(n, "v", path);
      } else {
        node.feature = require_index(n, "f", path);
        node.threshold = require_number(n, "t", path);
        node.left = require_index(n, "l", path);
        node.right = require_index(n, "r", path);
        if (node.feature < 0 || node.feature >= num_features) {
          schema_error(path + ".f", "feature index out of range");
        }
        for (auto [key, child] : {std::pair{".l", node.left}, std::pair{".r", node.right}}) {
          if (child <= 0 || child >= count) schema_error(path + key, "child index out of range");
          if (++parents[static_cast<std::size_t>(child)] > 1) {
            schema_error(path + key, "node " + std::to_string(child) + " has two parents");
          }
        }
      }
      tree.nodes.push_back(node);
    }
    for (int ni = 1; ni < count; ++ni) {
      if (parents[static_cast<std::size_t>(ni)] == 0) {
        schema_error(tree_path + ".nodes[" + std::to_string(ni) + "]", "unreachable node");
      }
    }
    // Every non-root node has exactly one parent; a cycle would leave some
    // node unreachable from the root, so count what the root reaches.
    std::vector<int> stack{0};
    std::vector<std::uint8_t> seen(nodes.size(), 0);
    int reached = 0;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(i)]) schema_error(tree_path, "cycle in tree");
      seen[static_cast<std::size_t>(i)] = 1;
      ++reached;
      const auto& node = tree.nodes[static_cast<std::size_t>(i)];
      if (!node.is_leaf()) {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    }
    if (reached != count) schema_error(tree_path, "nodes not reachable from the root");
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace ltrlab::ltr
