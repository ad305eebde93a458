#include "ltrlab/tree_analysis.hpp"

#include <algorithm>
#include <ostream>

#include "ltrlab/error.hpp"
#include "ltrlab/svmlight.hpp"

namespace ltrlab::trees {

namespace {

void require_known(const ltr::GbdtModel& model, const std::set<std::string>& names) {
  for (const auto& name : names) {
    if (std::find(model.feature_names.begin(), model.feature_names.end(), name) ==
        model.feature_names.end()) {
      throw ContractError("feature '" + name + "' is not in the model");
    }
  }
}

}  // namespace

void NodeAdjacencyReport::write_csv(std::ostream& out) const {
  out << "parent_feature,child_feature,count,share\n";
  for (const auto& [parent, entry] : parents) {
    for (const auto& [child, tally] : entry.children) {
      out << parent << ',' << child << ',' << tally.count << ','
          << ltr::format_double(tally.share) << '\n';
    }
  }
}

NodeAdjacencyReport child_feature_distribution(
    const ltr::GbdtModel& model, const std::set<std::string>& parent_features,
    const std::optional<std::set<std::string>>& child_filter) {
  require_known(model, parent_features);
  if (child_filter) require_known(model, *child_filter);

  NodeAdjacencyReport report;
  for (const auto& parent : parent_features) report.parents[parent];

  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto& parent_name = model.feature_names[static_cast<std::size_t>(node.feature)];
      auto entry = report.parents.find(parent_name);
      if (entry == report.parents.end()) continue;
      ++entry->second.parent_nodes;
      for (int child_index : {node.left, node.right}) {
        const auto& child = tree.nodes[static_cast<std::size_t>(child_index)];
        if (child.is_leaf()) continue;
        const auto& child_name = model.feature_names[static_cast<std::size_t>(child.feature)];
        if (child_filter && !child_filter->contains(child_name)) continue;
        ++entry->second.children[child_name].count;
      }
    }
  }

  for (auto& [parent, entry] : report.parents) {
    long total = 0;
    for (const auto& [name, tally] : entry.children) total += tally.count;
    for (auto& [name, tally] : entry.children) {
      tally.share = static_cast<double>(tally.count) / static_cast<double>(total);
    }
  }
  return report;
}

std::map<std::string, long> feature_split_frequency(const ltr::GbdtModel& model) {
  std::map<std::string, long> counts;
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) ++counts[model.feature_names[static_cast<std::size_t>(node.feature)]];
    }
  }
  return counts;
}

}  // namespace ltrlab::trees
