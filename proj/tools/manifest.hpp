#pragma once

#include <string>
#include <vector>

#include "schottky/json_io.hpp"

namespace schottky::cli {

using json_io::Json;

std::string sha256_hex(const std::string& bytes);

struct FileHash {
  std::string path;
  std::string sha256;
};

// Provenance record written next to every result. Only started_at and
// wall_time_seconds vary between identical runs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  std::vector<FileHash> inputs;
  std::vector<FileHash> outputs;
  double wall_time_seconds = 0;
  std::string started_at;
  Json verdicts = Json::object();
  Json claims = Json::array();
  int exit_code = 0;
  std::string error;

  Json to_json() const;
};

std::string utc_timestamp();

}  // namespace schottky::cli
