#pragma once

// Run manifests: which command ran with which inputs and seed, and the
// SHA-256 of every file it produced.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ltrlab {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;      // role -> path as given
  std::map<std::string, std::string> parameters;  // name -> value as text
  std::vector<ManifestEntry> outputs;             // sorted by path

  std::string to_json() const;
};

/// Collects output files in memory and writes them only on commit(), so a
/// command that fails midway leaves no partial outputs behind.
class OutputSet {
 public:
  /// Throws ContractError on a duplicate or non-relative path.
  void add(std::string relative_path, std::string content);
  bool empty() const { return files_.empty(); }

  /// Creates `dir`, writes every file through a temporary name and rename,
  /// fills manifest.outputs, then writes `manifest.json` last.
  void commit(const std::filesystem::path& dir, RunManifest& manifest) const;

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace ltrlab
