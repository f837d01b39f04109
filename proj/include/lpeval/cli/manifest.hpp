#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "lpeval/error.hpp"

namespace lpeval::cli {

/// Lowercase hex SHA-256 of `bytes`.
inline std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never sees a partial file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

/// Collects the outputs of one run and records their digests.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, std::string_view content) {
    atomic_write(dir_ / name, content);
    digests_[name] = sha256_hex(content);
  }

  void write_json(const std::string& name, const nlohmann::ordered_json& j) {
    write(name, j.dump(2) + "\n");
  }

  const std::map<std::string, std::string>& digests() const { return digests_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> digests_;
};

/// Provenance for one run: command, effective config, seed, input digest and
/// a digest per artifact. Contains nothing that varies between identical runs.
struct RunManifest {
  std::string tool = "lpeval";
  std::string version;
  std::string command;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::string input_digest;

  nlohmann::ordered_json to_json(const ArtifactWriter& artifacts) const {
    nlohmann::ordered_json j;
    j["tool"] = tool;
    j["version"] = version;
    j["command"] = command;
    j["seed"] = seed;
    j["input_sha256"] = input_digest;
    j["config"] = config;
    auto list = nlohmann::ordered_json::object();
    for (const auto& [name, digest] : artifacts.digests()) list[name] = digest;
    j["artifacts"] = list;
    return j;
  }
};

}  // namespace lpeval::cli
