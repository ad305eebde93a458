#include "ltrlab/svmlight.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "ltrlab/error.hpp"

namespace ltrlab::ltr {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError("svmlight line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string comment_field(std::string_view comment, std::string_view key) {
  std::istringstream in{std::string(comment)};
  std::string token;
  while (in >> token) {
    if (token.size() > key.size() + 1 && token.compare(0, key.size(), key) == 0 &&
        token[key.size()] == '=') {
      return token.substr(key.size() + 1);
    }
  }
  return {};
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_svmlight(std::ostream& out, const RankingDataset& dataset) {
  for (std::size_t gi = 0; gi < dataset.groups.size(); ++gi) {
    const auto& group = dataset.groups[gi];
    for (const auto& doc : group.docs) {
      out << doc.grade << " qid:" << gi + 1;
      for (std::size_t c = 0; c < doc.features.size(); ++c) {
        out << ' ' << c + 1 << ':' << format_double(doc.features[c]);
      }
      out << " # q=" << group.query_id << " p=" << doc.product_id << '\n';
    }
  }
}

void write_feature_sidecar(std::ostream& out, const std::vector<std::string>& feature_names) {
  out << "index,feature_name\n";
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    out << i + 1 << ',' << feature_names[i] << '\n';
  }
}

std::vector<std::string> read_feature_sidecar(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "index,feature_name") {
        throw ParseError("feature sidecar: expected header 'index,feature_name'");
      }
      continue;
    }
    const auto comma = line.find(',');
    std::size_t index = 0;
    if (comma == std::string::npos ||
        !parse_number(std::string_view(line).substr(0, comma), index) ||
        index != names.size() + 1) {
      throw ParseError("feature sidecar line " + std::to_string(line_no) +
                       ": expected consecutive 1-based indices");
    }
    names.push_back(line.substr(comma + 1));
  }
  if (line_no == 0) throw ParseError("feature sidecar: empty file");
  return names;
}

RankingDataset read_svmlight(std::istream& in, std::vector<std::string> feature_names) {
  RankingDataset dataset;
  dataset.feature_names = std::move(feature_names);
  const std::size_t cols = dataset.feature_names.size();
  std::string line;
  std::size_t line_no = 0;
  long current_qid = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string_view body = line;
    std::string_view comment;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      comment = body.substr(hash + 1);
      body = body.substr(0, hash);
    }
    std::istringstream tokens{std::string(body)};
    std::string token;
    Document doc;
    doc.features.assign(cols, 0.0);
    if (!(tokens >> token) || !parse_number(token, doc.grade)) fail(line_no, "bad label");
    long qid = 0;
    if (!(tokens >> token) || token.rfind("qid:", 0) != 0 ||
        !parse_number(std::string_view(token).substr(4), qid)) {
      fail(line_no, "missing qid");
    }
    while (tokens >> token) {
      const auto colon = token.find(':');
      std::size_t index = 0;
      double value = 0.0;
      if (colon == std::string::npos ||
          !parse_number(std::string_view(token).substr(0, colon), index) ||
          !parse_number(std::string_view(token).substr(colon + 1), value)) {
        fail(line_no, "bad feature token '" + token + "'");
      }
      if (index < 1 || index > cols) fail(line_no, "feature index out of range");
      doc.features[index - 1] = value;
    }
    doc.product_id = comment_field(comment, "p");
    if (qid != current_qid) {
      current_qid = qid;
      QueryGroup group;
      group.query_id = comment_field(comment, "q");
      if (group.query_id.empty()) group.query_id = std::to_string(qid);
      dataset.groups.push_back(std::move(group));
    }
    dataset.groups.back().docs.push_back(std::move(doc));
  }
  return dataset;
}

}  // namespace ltrlab::ltr
