#pragma once

// Run manifests. The manifest embedded in every output carries only inputs
// (command, digest of the canonical configuration, seed, version), so reruns
// produce byte-identical files; wall-clock times go to a separate
// run_manifest.json.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"

namespace ewclt::cli {

inline constexpr const char *version = "ewclt 1.0.0";

inline std::string sha256_hex(const std::string &data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

// nlohmann::json keeps object keys sorted, so dump() is canonical.
inline std::string config_digest(const nlohmann::json &canonical) {
  return sha256_hex(canonical.dump());
}

struct RunManifest {
  std::string command;
  nlohmann::json inputs;
  std::uint64_t seed = 0;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  nlohmann::json embedded() const {
    return {{"command", command},
            {"config_digest", config_digest(inputs)},
            {"seed", seed},
            {"versions", version},
            {"inputs", inputs}};
  }

  nlohmann::json with_times() const {
    auto j = embedded();
    j["started"] = iso_time(started);
    j["finished"] = iso_time(std::chrono::system_clock::now());
    return j;
  }

  static std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
  }
};

} // namespace ewclt::cli
