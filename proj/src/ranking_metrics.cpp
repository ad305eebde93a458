#include "ltrlab/ranking_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltrlab/error.hpp"

namespace ltrlab::ltr {

namespace {

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

// Discount for a 0-based position.
double discount(std::size_t position) { return 1.0 / std::log2(static_cast<double>(position) + 2.0); }

double dcg(std::span<const int> ranked, int k) {
  const std::size_t n = std::min(ranked.size(), static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += gain(ranked[i]) * discount(i);
  return total;
}

double ideal_dcg(std::span<const int> grades, int k) {
  std::vector<int> sorted(grades.begin(), grades.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return dcg(sorted, k);
}

}  // namespace

double ndcg_at_k(std::span<const int> ranked_grades, int k) {
  if (k < 1) throw ContractError("ndcg_at_k: k must be >= 1");
  if (ranked_grades.empty()) throw ContractError("ndcg_at_k: empty ranking");
  const double ideal = ideal_dcg(ranked_grades, k);
  if (ideal == 0.0) return 1.0;
  return dcg(ranked_grades, k) / ideal;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double group_ndcg(std::span<const double> scores, std::span<const int> grades, int k) {
  const auto order = rank_by_score(scores);
  std::vector<int> ranked;
  ranked.reserve(order.size());
  for (std::size_t i : order) ranked.push_back(grades[i]);
  return ndcg_at_k(ranked, k);
}

LambdaResult lambda_gradients(std::span<const double> scores, std::span<const int> grades,
                              double sigma, int k) {
  if (scores.size() != grades.size()) {
    throw ContractError("lambda_gradients: scores and grades differ in length");
  }
  if (k < 1) throw ContractError("lambda_gradients: k must be >= 1");
  const std::size_t n = scores.size();
  LambdaResult result{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double ideal = n == 0 ? 0.0 : ideal_dcg(grades, k);
  if (ideal == 0.0) return result;

  const auto order = rank_by_score(scores);
  const auto k_size = static_cast<std::size_t>(k);
  std::vector<double> gains(n);
  std::vector<double> discounts(n, 0.0);  // truncated at k
  for (std::size_t r = 0; r < n; ++r) {
    if (r < k_size) discounts[order[r]] = discount(r);
  }
  for (std::size_t i = 0; i < n; ++i) gains[i] = gain(grades[i]);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (grades[i] <= grades[j]) continue;
      const double delta =
          std::abs((gains[i] - gains[j]) * (discounts[i] - discounts[j])) / ideal;
      if (delta == 0.0) continue;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double lambda = sigma * rho * delta;
      const double hessian = sigma * sigma * rho * (1.0 - rho) * delta;
      result.lambdas[i] += lambda;
      result.lambdas[j] -= lambda;
      result.hessians[i] += hessian;
      result.hessians[j] += hessian;
    }
  }
  return result;
}

}  // namespace ltrlab::ltr
