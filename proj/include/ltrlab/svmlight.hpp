#pragma once

// SVMLight-with-qid export of ranking datasets:
//   <grade> qid:<int> 1:<v> 2:<v> ... # q=<query_id> p=<product_id>
// Column indices are 1-based positions in the dataset's (sorted) feature
// names; the mapping travels in a sidecar CSV `index,feature_name`.

#include <iosfwd>
#include <string>
#include <vector>

#include "ltrlab/gbdt.hpp"

namespace ltrlab::ltr {

void write_svmlight(std::ostream& out, const RankingDataset& dataset);
void write_feature_sidecar(std::ostream& out, const std::vector<std::string>& feature_names);

std::vector<std::string> read_feature_sidecar(std::istream& in);

/// Consecutive lines sharing a qid form one group. Missing columns read as
/// 0. Throws ParseError with the line number on malformed input.
RankingDataset read_svmlight(std::istream& in, std::vector<std::string> feature_names);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace ltrlab::ltr
