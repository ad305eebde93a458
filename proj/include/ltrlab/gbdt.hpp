#pragma once

// Gradient-boosted regression trees trained on LambdaRank gradients.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltrlab::ltr {

struct Document {
  std::string product_id;
  std::vector<double> features;
  int grade = 0;
};

struct QueryGroup {
  std::string query_id;
  std::vector<Document> docs;
};

/// Query-grouped dense feature rows with graded relevance (0..3).
struct RankingDataset {
  std::vector<QueryGroup> groups;
  std::vector<std::string> feature_names;

  /// Throws ContractError when a group has fewer than two documents, a grade
  /// is outside 0..3, or a row length differs from feature_names.
  void validate() const;
  std::size_t num_docs() const;
};

/// Row-major matrix of feature values.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Internal node when `feature >= 0`: rows with value < threshold go left.
/// Leaf otherwise, carrying `value`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct TrainParams {
  int num_trees = 100;
  int max_depth = 6;
  int min_samples_leaf = 20;
  double learning_rate = 0.1;
  double sigma = 1.0;
  int ndcg_k = 10;
  std::uint64_t seed = 42;

  void validate() const;
};

struct GbdtModel {
  std::vector<std::string> feature_names;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;

  /// base_score + learning_rate * sum of tree outputs, accumulated tree by
  /// tree in forest order (the same order training uses). Throws
  /// ContractError when the row length does not match feature_names.
  double predict(std::span<const double> row) const;
  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

/// Regularizer in split gains and leaf values.
inline constexpr double kHessianEpsilon = 1e-6;

/// Second-order exact greedy regression tree. Gain of a split is
///   G_L^2/(H_L+eps) + G_R^2/(H_R+eps) - G^2/(H+eps)
/// over midpoints between consecutive distinct values; leaves hold
/// G/(H+eps). Ties go to the lowest feature index, then the lowest threshold.
/// With no positive-gain split, or fewer than 2*min_samples_leaf rows, the
/// result is a single leaf.
Tree fit_tree(const DenseMatrix& features, std::span<const double> gradients,
              std::span<const double> hessians, const TrainParams& params);

struct TrainingLog {
  int k = 10;
  std::vector<double> train_ndcg;  // mean NDCG@k after each round

  /// CSV `round,train_ndcg_at_k`.
  void write_csv(std::ostream& out) const;
};

/// LambdaMART boosting loop. Throws ContractError on an empty or invalid
/// dataset.
GbdtModel train(const RankingDataset& dataset, const TrainParams& params,
                TrainingLog* log = nullptr);

/// Mean NDCG@k of the model's ranking over every group.
double evaluate_ndcg(const GbdtModel& model, const RankingDataset& dataset, int k);

/// JSON {feature_names, base_score, learning_rate, trees: [{nodes: [...]}]}
/// with internal nodes {f, t, l, r} and leaves {v}.
std::string serialize_model(const GbdtModel& model);

/// Throws ParseError naming the offending path (e.g. `trees[2].nodes[5].l`)
/// on any schema violation.
GbdtModel deserialize_model(std::string_view text);

}  // namespace ltrlab::ltr
