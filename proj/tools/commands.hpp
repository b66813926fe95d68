#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gps/config.hpp"

namespace gps::cli {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> holdout_domain;
  std::optional<int> epochs;
  bool no_mdsbn = false, no_br = false, no_mlg = false, no_fd = false, no_ie = false, no_id = false;
};

// Defaults, then the config file, then flags.
Config resolve_config(const Overrides& o, bool seed_is_generator);

int cmd_gen(const Overrides& o, const std::string& out_dir);
int cmd_train(const Overrides& o, const std::string& data_dir, const std::string& out_dir);
int cmd_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& out_path);
int cmd_ablate(const Overrides& o, const std::string& data_dir, const std::string& out_dir, int seeds, int jobs);
int cmd_label_stats(const Overrides& o, const std::string& data_dir, const std::string& out_path);

}  // namespace gps::cli
