#include "ltrlab/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "ltrlab/error.hpp"

namespace ltrlab {

namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [role, path] : inputs) j["inputs"][role] = path;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : parameters) j["parameters"][name] = value;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& entry : outputs) {
    j["outputs"].push_back({{"path", entry.path}, {"sha256", entry.sha256}, {"bytes", entry.bytes}});
  }
  return j.dump(2) + "\n";
}

void OutputSet::add(std::string relative_path, std::string content) {
  const std::filesystem::path p(relative_path);
  if (relative_path.empty() || p.is_absolute() || relative_path == "manifest.json") {
    throw ContractError("invalid output path '" + relative_path + "'");
  }
  for (const auto& part : p) {
    if (part == "..") throw ContractError("output path escapes the output directory");
  }
  if (!files_.emplace(std::move(relative_path), std::move(content)).second) {
    throw ContractError("output '" + p.string() + "' added twice");
  }
}

void OutputSet::commit(const std::filesystem::path& dir, RunManifest& manifest) const {
  manifest.outputs.clear();
  for (const auto& [path, content] : files_) {
    const auto target = dir / path;
    std::filesystem::create_directories(target.parent_path());
    write_file(target, content);
    manifest.outputs.push_back({path, sha256_hex(content), content.size()});
  }
  std::filesystem::create_directories(dir);
  write_file(dir / "manifest.json", manifest.to_json());
}

}  // namespace ltrlab
