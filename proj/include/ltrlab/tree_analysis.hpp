#pragma once

// Split-node adjacency statistics over a trained forest: which features sit
// directly beneath the splits on a given parent feature.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "ltrlab/gbdt.hpp"

namespace ltrlab::trees {

struct ChildTally {
  long count = 0;
  double share = 0.0;
};

struct ParentEntry {
  long parent_nodes = 0;  // internal nodes splitting on the parent feature
  std::map<std::string, ChildTally> children;
};

/// Keyed by parent feature name.
struct NodeAdjacencyReport {
  std::map<std::string, ParentEntry> parents;

  /// Summed share of the children whose names satisfy `pred`.
  template <typename Pred>
  double share_where(const std::string& parent, Pred pred) const {
    auto it = parents.find(parent);
    if (it == parents.end()) return 0.0;
    double total = 0.0;
    for (const auto& [name, tally] : it->second.children) {
      if (pred(name)) total += tally.share;
    }
    return total;
  }

  /// CSV `parent_feature,child_feature,count,share`.
  void write_csv(std::ostream& out) const;
};

/// For every internal node splitting on a parent feature, each immediate
/// child that is itself a split node (and passes `child_filter`, if given)
/// adds one to (parent, child feature). Shares normalize per parent over the
/// tallied children; leaf children are not counted. Throws ContractError on a
/// feature name the model does not have.
NodeAdjacencyReport child_feature_distribution(
    const ltr::GbdtModel& model, const std::set<std::string>& parent_features,
    const std::optional<std::set<std::string>>& child_filter = std::nullopt);

/// Number of internal nodes per feature name across the forest.
std::map<std::string, long> feature_split_frequency(const ltr::GbdtModel& model);

}  // namespace ltrlab::trees
