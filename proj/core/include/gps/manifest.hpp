#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "gps/config.hpp"

namespace gps {

inline constexpr const char* kVersion = "0.1.0";

// Config snapshot plus run metadata. The hash covers the canonical config
// JSON and the command, so re-running with the snapshot reproduces it.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::map<std::string, std::string> outputs;
  double seconds = 0.0;

  std::string hash() const;
  nlohmann::json to_json() const;
};

RunManifest make_manifest(const Config& cfg, const std::string& command);

}  // namespace gps
