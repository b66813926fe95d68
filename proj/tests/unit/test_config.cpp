#include <gtest/gtest.h>

#include <fstream>

#include "gps/common.hpp"
#include "gps/config.hpp"

namespace gps {
namespace {

std::string error_of(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsValidateAndRoundTrip) {
  Config c;
  EXPECT_NO_THROW(c.validate());
  const nlohmann::json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
}

TEST(Config, StatedDefaults) {
  Config c;
  EXPECT_EQ(c.labelgen.psi, 0.5);
  EXPECT_EQ(c.train.memory_momentum, 0.9);
  EXPECT_EQ(c.loss.margin, 0.3);
  EXPECT_EQ(c.train.sgd_momentum, 0.9);
  EXPECT_EQ(c.train.weight_decay, 5e-4);
  EXPECT_EQ(c.train.lr_decay_factor, 0.1);
  EXPECT_EQ(c.train.lr_decay_epoch, 12);
  EXPECT_EQ(c.train.epochs, 20);
  EXPECT_EQ(c.generator.num_domains, 3);
  EXPECT_EQ(c.generator.videos_per_domain, 10);
  EXPECT_EQ(c.generator.frames_per_video, 60);
  EXPECT_EQ(c.generator.identities_per_video, 8);
  EXPECT_EQ(c.generator.raw_dim, 32);
  EXPECT_EQ(c.train.embed_dim, 16);
  EXPECT_EQ(c.train.queue_size, 64);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(error_of({{"train", {{"lr", -1.0}}}}).find("train.lr"), std::string::npos);
  EXPECT_NE(error_of({{"train", {{"lr", "fast"}}}}).find("train.lr"), std::string::npos);
  EXPECT_NE(error_of({{"labelgen", {{"psi", 1.5}}}}).find("labelgen.psi"), std::string::npos);
  EXPECT_NE(error_of({{"generator", {{"bogus", 1}}}}).find("generator.bogus"), std::string::npos);
  EXPECT_NE(error_of({{"generator", {{"id_signal_dim", 30}}}}).find("generator.id_signal_dim"), std::string::npos);
  EXPECT_NE(error_of({{"generator", {{"decay_floor", 1.0}}}}).find("generator.decay_floor"), std::string::npos);
  EXPECT_NE(error_of({{"generator", {{"omission_rate", 1.2}}}}).find("generator.omission_rate"), std::string::npos);
}

TEST(Config, HoldoutMustBeTheBenchmarkDomainWithCrossview) {
  EXPECT_NE(error_of({{"train", {{"holdout_domain", 0}}}}).find("train.holdout_domain"), std::string::npos);
  EXPECT_EQ(error_of({{"train", {{"holdout_domain", 0}}}, {"generator", {{"crossview_videos", 1}}}}), "");
}

TEST(Config, LoadRejectsMissingAndMalformedFiles) {
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError);
  const std::string path = ::testing::TempDir() + "/bad_cfg.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path), ConfigError);
}

}  // namespace
}  // namespace gps
