#include "gps/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gps/common.hpp"

namespace gps {
namespace {

using nlohmann::json;

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config: field '" + field + "' " + what);
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown fields.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: section '" + path_ + "' must be an object");
  }

  template <typename T>
  void field(const char* name, T& out) {
    seen_.insert(name);
    auto it = j_.find(name);
    if (it == j_.end()) return;
    const std::string full = path_.empty() ? name : path_ + "." + name;
    if constexpr (std::is_same_v<T, bool>) {
      require(it->is_boolean(), full, "must be a boolean");
      out = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      require(it->is_number_integer(), full, "must be an integer");
      if constexpr (std::is_unsigned_v<T>) require(it->template get<long long>() >= 0, full, "must be non-negative");
      out = it->template get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      require(it->is_number(), full, "must be a number");
      out = it->template get<T>();
    } else {
      require(it->is_string(), full, "must be a string");
      out = it->template get<T>();
    }
  }

  const json* child(const char* name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* name) const { return path_.empty() ? name : path_ + "." + name; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("config: unknown field '" + (path_.empty() ? it.key() : path_ + "." + it.key()) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void unit_interval(double v, const std::string& field) { require(v >= 0.0 && v <= 1.0, field, "must lie in [0,1]"); }
void positive(double v, const std::string& field) { require(v > 0.0, field, "must be positive"); }

KernelKind kernel_from_string(const std::string& s, const std::string& field) {
  if (s == "linear") return KernelKind::linear;
  if (s == "gaussian_rbf") return KernelKind::gaussian_rbf;
  if (s == "random_features") return KernelKind::random_features;
  throw ConfigError("config: field '" + field + "' must be one of linear|gaussian_rbf|random_features");
}

}  // namespace

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::gaussian_rbf: return "gaussian_rbf";
    case KernelKind::random_features: return "random_features";
  }
  return "unknown";
}

void GeneratorConfig::validate() const {
  require(num_domains >= 1, "generator.num_domains", "must be >= 1");
  require(videos_per_domain >= 1, "generator.videos_per_domain", "must be >= 1");
  require(frames_per_video >= 2, "generator.frames_per_video", "must be >= 2");
  require(identities_per_video >= 1, "generator.identities_per_video", "must be >= 1");
  require(id_signal_dim >= 2, "generator.id_signal_dim", "must be >= 2");
  require(domain_signal_dim >= 1, "generator.domain_signal_dim", "must be >= 1");
  require(drift_dim >= 1 && drift_dim < id_signal_dim, "generator.drift_dim", "must lie in [1, id_signal_dim)");
  require(id_signal_dim + domain_signal_dim <= raw_dim, "generator.id_signal_dim",
          "plus domain_signal_dim exceeds raw_dim");
  require(geometry_offset() + 4 <= raw_dim, "generator.raw_dim",
          "leaves no room for the objectness and 4 geometry channels");
  positive(decay_sigma, "generator.decay_sigma");
  require(decay_floor >= 0.0 && decay_floor < 1.0, "generator.decay_floor", "must lie in [0,1)");
  require(noise_std >= 0.0, "generator.noise_std", "must be non-negative");
  unit_interval(omission_rate, "generator.omission_rate");
  require(omission_persistence >= 0.0 && omission_persistence < 1.0, "generator.omission_persistence", "must lie in [0,1)");
  require(jitter_std >= 0.0, "generator.jitter_std", "must be non-negative");
  unit_interval(false_box_rate, "generator.false_box_rate");
  unit_interval(gross_jitter_rate, "generator.gross_jitter_rate");
  require(gross_jitter_scale >= 1.0, "generator.gross_jitter_scale", "must be >= 1");
  unit_interval(box_drop_rate, "generator.box_drop_rate");
  unit_interval(aux_miss_rate, "generator.aux_miss_rate");
  require(aux_jitter_std >= 0.0, "generator.aux_jitter_std", "must be non-negative");
  require(background_per_frame >= 0, "generator.background_per_frame", "must be >= 0");
  require(proposal_jitter_std >= 0.0, "generator.proposal_jitter_std", "must be non-negative");
  require(min_presence > 0.0 && min_presence <= 1.0, "generator.min_presence", "must lie in (0,1]");
  require(style_gain_spread >= 0.0 && style_gain_spread < 1.0, "generator.style_gain_spread", "must lie in [0,1)");
  require(scene_scale >= 0.0, "generator.scene_scale", "must be non-negative");
  require(crossview_videos >= 1, "generator.crossview_videos", "must be >= 1");
  require(benchmark_domain >= -1 && benchmark_domain < num_domains, "generator.benchmark_domain",
          "must be -1 or a domain index");
}

void RefineConfig::validate() const {
  unit_interval(merge_iou_threshold, "refine.merge_iou_threshold");
  unit_interval(hard_conf_min, "refine.hard_conf_min");
}

void LabelgenConfig::validate() const { require(psi >= -1.0 && psi <= 1.0, "labelgen.psi", "must lie in [-1,1]"); }

void LossConfig::validate() const {
  positive(tau, "loss.tau");
  require(margin >= 0.0, "loss.margin", "must be non-negative");
  require(lambda_cov >= 0.0, "loss.lambda_cov", "must be non-negative");
  require(lambda_ie >= 0.0, "loss.lambda_ie", "must be non-negative");
  require(lambda_det >= 0.0, "loss.lambda_det", "must be non-negative");
  require(decorr_pairs >= 1, "loss.decorr_pairs", "must be >= 1");
  if (kernel.kind == KernelKind::random_features)
    require(kernel.num_random_features >= 1, "loss.kernel.num_random_features", "must be >= 1");
}

void DsbnConfig::validate() const {
  positive(eps, "dsbn.eps");
  require(momentum >= 0.0 && momentum < 1.0, "dsbn.momentum", "must lie in [0,1)");
  positive(temperature, "dsbn.temperature");
}

void IdselectConfig::validate() const {
  require(t >= 0.0, "idselect.t", "must be non-negative");
  require(probe_iters >= 1, "idselect.probe_iters", "must be >= 1");
  positive(probe_lr, "idselect.probe_lr");
  require(probe_l2 >= 0.0, "idselect.probe_l2", "must be non-negative");
}

void TrainConfig::validate() const {
  require(epochs >= 0, "train.epochs", "must be >= 0");
  require(batch_size >= 2, "train.batch_size", "must be >= 2");
  positive(lr, "train.lr");
  require(lr_decay_epoch >= 0, "train.lr_decay_epoch", "must be >= 0");
  positive(lr_decay_factor, "train.lr_decay_factor");
  require(sgd_momentum >= 0.0 && sgd_momentum < 1.0, "train.sgd_momentum", "must lie in [0,1)");
  require(weight_decay >= 0.0, "train.weight_decay", "must be non-negative");
  require(embed_dim >= 2, "train.embed_dim", "must be >= 2");
  require(memory_momentum >= 0.0 && memory_momentum < 1.0, "train.memory_momentum", "must lie in [0,1)");
  require(queue_size >= 0, "train.queue_size", "must be >= 0");
  require(holdout_domain >= -1, "train.holdout_domain", "must be >= -1");
}

void EvalConfig::validate() const { unit_interval(iou_min, "eval.iou_min"); }

void Config::validate() const {
  generator.validate();
  refine.validate();
  labelgen.validate();
  loss.validate();
  dsbn.validate();
  idselect.validate();
  train.validate();
  eval.validate();
  require(train.holdout_domain < generator.num_domains, "train.holdout_domain", "must be < generator.num_domains");
  // Training domains must keep every identity inside one video.
  require(generator.crossview_videos == 1 || holdout_domain() == generator.resolved_benchmark_domain(),
          "train.holdout_domain", "must equal generator.benchmark_domain while generator.crossview_videos > 1");
}

int Config::holdout_domain() const {
  return train.holdout_domain < 0 ? generator.num_domains - 1 : train.holdout_domain;
}

Config config_from_json(const json& j) {
  Config c;
  Section root(j, "");
  if (const json* s = root.child("generator")) {
    Section g(*s, "generator");
    auto& G = c.generator;
    g.field("num_domains", G.num_domains);
    g.field("videos_per_domain", G.videos_per_domain);
    g.field("frames_per_video", G.frames_per_video);
    g.field("identities_per_video", G.identities_per_video);
    g.field("raw_dim", G.raw_dim);
    g.field("id_signal_dim", G.id_signal_dim);
    g.field("domain_signal_dim", G.domain_signal_dim);
    g.field("drift_dim", G.drift_dim);
    g.field("decay_sigma", G.decay_sigma);
    g.field("decay_floor", G.decay_floor);
    g.field("noise_std", G.noise_std);
    g.field("omission_rate", G.omission_rate);
    g.field("omission_persistence", G.omission_persistence);
    g.field("jitter_std", G.jitter_std);
    g.field("false_box_rate", G.false_box_rate);
    g.field("seed", G.seed);
    g.field("gross_jitter_rate", G.gross_jitter_rate);
    g.field("gross_jitter_scale", G.gross_jitter_scale);
    g.field("box_drop_rate", G.box_drop_rate);
    g.field("aux_miss_rate", G.aux_miss_rate);
    g.field("aux_jitter_std", G.aux_jitter_std);
    g.field("background_per_frame", G.background_per_frame);
    g.field("proposal_jitter_std", G.proposal_jitter_std);
    g.field("min_presence", G.min_presence);
    g.field("id_scale", G.id_scale);
    g.field("domain_scale", G.domain_scale);
    g.field("context_scale", G.context_scale);
    g.field("style_gain_spread", G.style_gain_spread);
    g.field("style_offset_std", G.style_offset_std);
    g.field("objectness_scale", G.objectness_scale);
    g.field("geometry_gain", G.geometry_gain);
    g.field("contamination_gain", G.contamination_gain);
    g.field("scene_scale", G.scene_scale);
    g.field("crossview_videos", G.crossview_videos);
    g.field("benchmark_domain", G.benchmark_domain);
    g.finish();
  }
  if (const json* s = root.child("refine")) {
    Section r(*s, "refine");
    r.field("merge_iou_threshold", c.refine.merge_iou_threshold);
    r.field("hard_conf_min", c.refine.hard_conf_min);
    r.finish();
  }
  if (const json* s = root.child("labelgen")) {
    Section l(*s, "labelgen");
    l.field("psi", c.labelgen.psi);
    l.finish();
  }
  if (const json* s = root.child("loss")) {
    Section l(*s, "loss");
    l.field("tau", c.loss.tau);
    l.field("margin", c.loss.margin);
    l.field("lambda_cov", c.loss.lambda_cov);
    l.field("lambda_ie", c.loss.lambda_ie);
    l.field("lambda_det", c.loss.lambda_det);
    l.field("decorr_pairs", c.loss.decorr_pairs);
    if (const json* k = l.child("kernel")) {
      Section ks(*k, "loss.kernel");
      std::string kind = to_string(c.loss.kernel.kind);
      ks.field("kind", kind);
      c.loss.kernel.kind = kernel_from_string(kind, "loss.kernel.kind");
      ks.field("bandwidth", c.loss.kernel.bandwidth);
      ks.field("num_random_features", c.loss.kernel.num_random_features);
      ks.field("feature_seed", c.loss.kernel.feature_seed);
      ks.finish();
    }
    l.finish();
  }
  if (const json* s = root.child("dsbn")) {
    Section d(*s, "dsbn");
    d.field("eps", c.dsbn.eps);
    d.field("momentum", c.dsbn.momentum);
    d.field("temperature", c.dsbn.temperature);
    d.field("reid_head", c.dsbn.reid_head);
    d.field("det_head", c.dsbn.det_head);
    d.finish();
  }
  if (const json* s = root.child("idselect")) {
    Section d(*s, "idselect");
    d.field("t", c.idselect.t);
    d.field("probe_iters", c.idselect.probe_iters);
    d.field("probe_lr", c.idselect.probe_lr);
    d.field("probe_l2", c.idselect.probe_l2);
    d.finish();
  }
  if (const json* s = root.child("train")) {
    Section t(*s, "train");
    auto& T = c.train;
    t.field("epochs", T.epochs);
    t.field("batch_size", T.batch_size);
    t.field("lr", T.lr);
    t.field("lr_decay_epoch", T.lr_decay_epoch);
    t.field("lr_decay_factor", T.lr_decay_factor);
    t.field("sgd_momentum", T.sgd_momentum);
    t.field("weight_decay", T.weight_decay);
    t.field("embed_dim", T.embed_dim);
    t.field("memory_momentum", T.memory_momentum);
    t.field("queue_size", T.queue_size);
    t.field("holdout_domain", T.holdout_domain);
    t.field("seed", T.seed);
    if (const json* tg = t.child("toggles")) {
      Section ts(*tg, "train.toggles");
      ts.field("mdsbn", T.toggles.mdsbn);
      ts.field("br", T.toggles.br);
      ts.field("mlg", T.toggles.mlg);
      ts.field("fd", T.toggles.fd);
      ts.field("ie", T.toggles.ie);
      ts.field("id", T.toggles.id);
      ts.finish();
    }
    t.finish();
  }
  if (const json* s = root.child("eval")) {
    Section e(*s, "eval");
    e.field("iou_min", c.eval.iou_min);
    e.field("query_seed", c.eval.query_seed);
    e.finish();
  }
  root.finish();
  c.validate();
  return c;
}

json config_to_json(const Config& c) {
  const auto& G = c.generator;
  const auto& T = c.train;
  return json{
      {"generator",
       {{"num_domains", G.num_domains},
        {"videos_per_domain", G.videos_per_domain},
        {"frames_per_video", G.frames_per_video},
        {"identities_per_video", G.identities_per_video},
        {"raw_dim", G.raw_dim},
        {"id_signal_dim", G.id_signal_dim},
        {"domain_signal_dim", G.domain_signal_dim},
        {"drift_dim", G.drift_dim},
        {"decay_sigma", G.decay_sigma},
        {"decay_floor", G.decay_floor},
        {"noise_std", G.noise_std},
        {"omission_rate", G.omission_rate},
        {"omission_persistence", G.omission_persistence},
        {"jitter_std", G.jitter_std},
        {"false_box_rate", G.false_box_rate},
        {"seed", G.seed},
        {"gross_jitter_rate", G.gross_jitter_rate},
        {"gross_jitter_scale", G.gross_jitter_scale},
        {"box_drop_rate", G.box_drop_rate},
        {"aux_miss_rate", G.aux_miss_rate},
        {"aux_jitter_std", G.aux_jitter_std},
        {"background_per_frame", G.background_per_frame},
        {"proposal_jitter_std", G.proposal_jitter_std},
        {"min_presence", G.min_presence},
        {"id_scale", G.id_scale},
        {"domain_scale", G.domain_scale},
        {"context_scale", G.context_scale},
        {"style_gain_spread", G.style_gain_spread},
        {"style_offset_std", G.style_offset_std},
        {"objectness_scale", G.objectness_scale},
        {"geometry_gain", G.geometry_gain},
        {"contamination_gain", G.contamination_gain},
        {"scene_scale", G.scene_scale},
        {"crossview_videos", G.crossview_videos},
        {"benchmark_domain", G.benchmark_domain}}},
      {"refine", {{"merge_iou_threshold", c.refine.merge_iou_threshold}, {"hard_conf_min", c.refine.hard_conf_min}}},
      {"labelgen", {{"psi", c.labelgen.psi}}},
      {"loss",
       {{"tau", c.loss.tau},
        {"margin", c.loss.margin},
        {"lambda_cov", c.loss.lambda_cov},
        {"lambda_ie", c.loss.lambda_ie},
        {"lambda_det", c.loss.lambda_det},
        {"decorr_pairs", c.loss.decorr_pairs},
        {"kernel",
         {{"kind", to_string(c.loss.kernel.kind)},
          {"bandwidth", c.loss.kernel.bandwidth},
          {"num_random_features", c.loss.kernel.num_random_features},
          {"feature_seed", c.loss.kernel.feature_seed}}}}},
      {"dsbn",
       {{"eps", c.dsbn.eps},
        {"momentum", c.dsbn.momentum},
        {"temperature", c.dsbn.temperature},
        {"reid_head", c.dsbn.reid_head},
        {"det_head", c.dsbn.det_head}}},
      {"idselect",
       {{"t", c.idselect.t},
        {"probe_iters", c.idselect.probe_iters},
        {"probe_lr", c.idselect.probe_lr},
        {"probe_l2", c.idselect.probe_l2}}},
      {"train",
       {{"epochs", T.epochs},
        {"batch_size", T.batch_size},
        {"lr", T.lr},
        {"lr_decay_epoch", T.lr_decay_epoch},
        {"lr_decay_factor", T.lr_decay_factor},
        {"sgd_momentum", T.sgd_momentum},
        {"weight_decay", T.weight_decay},
        {"embed_dim", T.embed_dim},
        {"memory_momentum", T.memory_momentum},
        {"queue_size", T.queue_size},
        {"holdout_domain", T.holdout_domain},
        {"seed", T.seed},
        {"toggles",
         {{"mdsbn", T.toggles.mdsbn},
          {"br", T.toggles.br},
          {"mlg", T.toggles.mlg},
          {"fd", T.toggles.fd},
          {"ie", T.toggles.ie},
          {"id", T.toggles.id}}}}},
      {"eval", {{"iou_min", c.eval.iou_min}, {"query_seed", c.eval.query_seed}}},
  };
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace gps
