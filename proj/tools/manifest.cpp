#include "manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <stdexcept>

namespace schottky::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json RunManifest::to_json() const {
  auto files = [](const std::vector<FileHash>& fs) {
    Json out = Json::array();
    for (const auto& f : fs) out.push_back(Json{{"path", f.path}, {"sha256", f.sha256}});
    return out;
  };
  Json j;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["verdicts"] = verdicts;
  j["claims"] = claims;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  j["started_at"] = started_at;
  j["wall_time_seconds"] = wall_time_seconds;
  return j;
}

}  // namespace schottky::cli
