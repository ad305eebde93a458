#pragma once

#include <span>
#include <vector>

namespace ltrlab::ltr {

/// NDCG@k with exponential gain 2^g - 1 and log2(i + 1) discount. Returns 1
/// when the ideal DCG is zero. Throws ContractError for k < 1 or empty input.
double ndcg_at_k(std::span<const int> ranked_grades, int k);

/// Positions of documents sorted by descending score; ties keep input order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

/// Mean NDCG@k of one group scored by `scores`.
double group_ndcg(std::span<const double> scores, std::span<const int> grades, int k);

struct LambdaResult {
  std::vector<double> lambdas;
  std::vector<double> hessians;
};

/// LambdaRank pseudo-gradients for one query group. For each pair with
/// grade_i > grade_j, rho = 1 / (1 + exp(sigma (s_i - s_j))) and w = |delta
/// NDCG@k| of swapping the two at their current ranks; lambda_i gains
/// sigma rho w, lambda_j loses it, and both hessians gain sigma^2 rho (1 - rho) w.
/// Positive lambda pushes a score up.
LambdaResult lambda_gradients(std::span<const double> scores, std::span<const int> grades,
                              double sigma, int k);

}  // namespace ltrlab::ltr
