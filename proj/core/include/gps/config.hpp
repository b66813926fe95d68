#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace gps {

struct GeneratorConfig {
  int num_domains = 3;
  int videos_per_domain = 10;
  int frames_per_video = 60;
  int identities_per_video = 8;
  int raw_dim = 32;
  int id_signal_dim = 18;
  int domain_signal_dim = 8;
  int drift_dim = 6;  // trailing identity channels holding the appearance drift
  double decay_sigma = 10.0;  // frames
  double decay_floor = 0.4;   // asymptotic same-identity cosine
  double noise_std = 0.1;
  double omission_rate = 0.3;
  double omission_persistence = 0.9;  // lag-1 correlation of per-track omissions
  double jitter_std = 0.06;  // fraction of box size
  double false_box_rate = 0.15;
  std::uint64_t seed = 7;

  // Noise and scene model knobs beyond the core set.
  double gross_jitter_rate = 0.12;   // tracker drift: jitter scaled by gross_jitter_scale
  double gross_jitter_scale = 6.0;
  double box_drop_rate = 0.05;       // primary annotator misses the person entirely
  double aux_miss_rate = 0.1;        // auxiliary detector misses the person
  double aux_jitter_std = 0.03;
  int background_per_frame = 4;      // clutter proposals per frame
  double proposal_jitter_std = 0.1;
  double min_presence = 0.6;         // shortest track as a fraction of the video
  double id_scale = 1.0;
  double domain_scale = 0.8;
  double context_scale = 0.8;        // per-video drifting background context
  double style_gain_spread = 0.5;    // per-domain channel gains in [1-s, 1+s]
  double style_offset_std = 0.5;
  double objectness_scale = 1.0;
  double geometry_gain = 2.0;
  double contamination_gain = 1.5;
  double scene_scale = 0.8;   // static per-video background component
  // In the benchmark domain, groups of crossview_videos consecutive videos
  // share one identity set (multi-camera gallery). 1 disables.
  int crossview_videos = 2;
  int benchmark_domain = -1;  // -1 selects the last domain

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Raw-feature layout: [identity (stable, drift) | domain | objectness |
  // geometry(4) | free].
  int objectness_dim() const { return id_signal_dim + domain_signal_dim; }
  int geometry_offset() const { return objectness_dim() + 1; }
  int resolved_benchmark_domain() const { return benchmark_domain < 0 ? num_domains - 1 : benchmark_domain; }
};

struct RefineConfig {
  double merge_iou_threshold = 0.7;
  double hard_conf_min = 0.3;
  void validate() const;
};

struct LabelgenConfig {
  double psi = 0.5;
  void validate() const;
};

enum class KernelKind { linear, gaussian_rbf, random_features };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian_rbf;
  double bandwidth = 0.0;  // <= 0 selects the median heuristic
  int num_random_features = 256;
  std::uint64_t feature_seed = 17;
  bool median_heuristic() const { return bandwidth <= 0.0; }
};

struct LossConfig {
  double tau = 0.1;
  double margin = 0.3;
  double lambda_cov = 1.0;
  double lambda_ie = 1.0;
  double lambda_det = 1.0;
  int decorr_pairs = 8;
  KernelSpec kernel;
  void validate() const;
};

struct DsbnConfig {
  double eps = 1e-5;
  double momentum = 0.9;
  double temperature = 1.0;
  bool reid_head = true;   // only consulted when the mDSBN toggle is on
  bool det_head = true;
  void validate() const;
};

struct IdselectConfig {
  double t = 0.02;
  int probe_iters = 300;
  double probe_lr = 0.5;
  double probe_l2 = 1e-4;
  void validate() const;
};

struct Toggles {
  bool mdsbn = true;
  bool br = true;
  bool mlg = true;
  bool fd = true;
  bool ie = true;
  bool id = true;
  bool operator==(const Toggles&) const = default;
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double lr = 0.01;
  int lr_decay_epoch = 12;
  double lr_decay_factor = 0.1;
  double sgd_momentum = 0.9;
  double weight_decay = 5e-4;
  int embed_dim = 16;
  double memory_momentum = 0.9;
  int queue_size = 64;
  int holdout_domain = -1;  // -1 selects the last domain
  std::uint64_t seed = 1;
  Toggles toggles;
  void validate() const;
};

struct EvalConfig {
  double iou_min = 0.5;
  std::uint64_t query_seed = 3;
  void validate() const;
};

struct Config {
  GeneratorConfig generator;
  RefineConfig refine;
  LabelgenConfig labelgen;
  LossConfig loss;
  DsbnConfig dsbn;
  IdselectConfig idselect;
  TrainConfig train;
  EvalConfig eval;

  void validate() const;
  int holdout_domain() const;
};

// Strict parsing: unknown keys and wrong types raise ConfigError with the
// dotted field path, e.g. "train.lr".
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::string& path);

std::string to_string(KernelKind k);

}  // namespace gps
