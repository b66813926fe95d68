#include "gps/manifest.hpp"

#include "gps/common.hpp"

namespace gps {

std::string RunManifest::hash() const {
  return hex64(fnv1a64(command + "\n" + config.dump() + "\n" + std::to_string(seed) + "\n" + version));
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"config", config}, {"seed", seed}, {"version", version},
          {"outputs", outputs}, {"seconds", seconds}, {"hash", hash()}};
}

RunManifest make_manifest(const Config& cfg, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.config = config_to_json(cfg);
  m.seed = cfg.train.seed;
  return m;
}

}  // namespace gps
