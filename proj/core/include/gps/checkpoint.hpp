#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gps/config.hpp"
#include "gps/idselect.hpp"
#include "gps/model.hpp"
#include "gps/protomem.hpp"

namespace gps::ckpt {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Config config;
  std::string manifest;
  model::Model model;
  mem::IdentityMemory identities;
  mem::NegativeQueue queue;
  mem::HalfPrototypes halves;
  std::optional<idselect::ChannelMask> mask;
};

nlohmann::json to_json(const Checkpoint& c);
// Throws ConfigError on a malformed or incompatible document.
Checkpoint from_json(const nlohmann::json& j);

void save(const Checkpoint& c, const std::string& path);
// Missing file, unsupported version or bad shape: ConfigError.
Checkpoint load(const std::string& path);

}  // namespace gps::ckpt
