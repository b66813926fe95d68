#include "gps/checkpoint.hpp"

#include <fstream>

#include "gps/dataset_io.hpp"

namespace gps::ckpt {

using nlohmann::json;
using io::mat_from_json;
using io::mat_to_json;
using io::vec_from_json;
using io::vec_to_json;

namespace {

json dsbn_to_json(const dsbn::Dsbn& d) {
  json branches = json::array();
  for (Eigen::Index i = 0; i < d.branches(); ++i) {
    const auto& b = d.branch(i);
    branches.push_back({{"gamma", vec_to_json(b.gamma)},
                        {"beta", vec_to_json(b.beta)},
                        {"running_mean", vec_to_json(b.running_mean)},
                        {"running_var", vec_to_json(b.running_var)},
                        {"populated", b.populated}});
  }
  return {{"channels", d.channels()},
          {"eps", d.eps()},
          {"momentum", d.momentum()},
          {"temperature", d.temperature()},
          {"branches", branches},
          {"prototypes", mat_to_json(d.prototypes().matrix())}};
}

dsbn::Dsbn dsbn_from_json(const json& j) {
  const Mat C = mat_from_json(j.at("prototypes"));
  const auto& br = j.at("branches");
  dsbn::Dsbn d(static_cast<Eigen::Index>(br.size()), j.at("channels").get<Eigen::Index>(), C.cols(),
               j.at("eps").get<double>(), j.at("momentum").get<double>(), j.at("temperature").get<double>());
  if (C.rows() != d.branches()) throw ConfigError("checkpoint: prototype rows do not match branch count");
  for (std::size_t i = 0; i < br.size(); ++i) {
    auto& b = d.branch(static_cast<Eigen::Index>(i));
    b.gamma = vec_from_json(br[i].at("gamma"));
    b.beta = vec_from_json(br[i].at("beta"));
    b.running_mean = vec_from_json(br[i].at("running_mean"));
    b.running_var = vec_from_json(br[i].at("running_var"));
    b.populated = br[i].at("populated").get<bool>();
    for (const Vec* v : {&b.gamma, &b.beta, &b.running_mean, &b.running_var})
      if (v->size() != d.channels()) throw ConfigError("checkpoint: DSBN branch has the wrong channel count");
  }
  d.prototypes().matrix() = C;
  return d;
}

}  // namespace

json to_json(const Checkpoint& c) {
  const auto& m = c.model;
  json halves = json::array();
  for (int l : c.halves.labels()) {
    json h = {{"label", l}};
    if (auto v = c.halves.get(l, synth::Half::first)) h["first"] = vec_to_json(*v);
    if (auto v = c.halves.get(l, synth::Half::second)) h["second"] = vec_to_json(*v);
    halves.push_back(std::move(h));
  }
  std::vector<int> init(c.identities.init_flags().begin(), c.identities.init_flags().end());
  json out = {{"format", "gps-checkpoint"},
              {"version", kCheckpointFormatVersion},
              {"manifest", c.manifest},
              {"config", config_to_json(c.config)},
              {"model",
               {{"W", mat_to_json(m.W)},
                {"det_w", vec_to_json(m.det_w)},
                {"det_b", m.det_b},
                {"det_R", mat_to_json(m.det_R)},
                {"det_rb", vec_to_json(m.det_rb)},
                {"train_domains", m.train_domains},
                {"reid", dsbn_to_json(m.reid)},
                {"det", dsbn_to_json(m.det)}}},
              {"memory",
               {{"labels", c.identities.labels()},
                {"momentum", c.identities.momentum()},
                {"V", mat_to_json(c.identities.matrix())},
                {"initialized", init},
                {"queue",
                 {{"slots", mat_to_json(c.queue.slots())}, {"size", c.queue.size()}, {"cursor", c.queue.cursor()}}},
                {"halves", halves}}},
              {"mask", c.mask ? json(c.mask->alpha) : json(nullptr)}};
  return out;
}

Checkpoint from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "gps-checkpoint") throw ConfigError("checkpoint: not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointFormatVersion)
      throw ConfigError("checkpoint: unsupported version " + std::to_string(j.at("version").get<int>()));
    Checkpoint c;
    c.manifest = j.at("manifest").get<std::string>();
    c.config = config_from_json(j.at("config"));
    const auto& jm = j.at("model");
    auto& m = c.model;
    m.W = mat_from_json(jm.at("W"));
    m.det_w = vec_from_json(jm.at("det_w"));
    m.det_b = jm.at("det_b").get<double>();
    m.det_R = mat_from_json(jm.at("det_R"));
    m.det_rb = vec_from_json(jm.at("det_rb"));
    m.train_domains = jm.at("train_domains").get<std::vector<int>>();
    m.reid = dsbn_from_json(jm.at("reid"));
    m.det = dsbn_from_json(jm.at("det"));
    if (m.reid.channels() != m.W.cols() || m.det.channels() != m.W.rows() || m.det_w.size() != m.W.rows() ||
        m.det_R.rows() != m.W.rows() || m.det_R.cols() != 4 || m.det_rb.size() != 4)
      throw ConfigError("checkpoint: model parameter shapes are inconsistent");

    const auto& jmem = j.at("memory");
    const auto labels = jmem.at("labels").get<std::vector<int>>();
    const Mat V = mat_from_json(jmem.at("V"));
    const auto init = jmem.at("initialized").get<std::vector<int>>();
    const double mom = jmem.at("momentum").get<double>();
    if (V.rows() != static_cast<Eigen::Index>(labels.size()) || init.size() != labels.size())
      throw ConfigError("checkpoint: identity memory shape mismatch");
    if (!labels.empty() && V.cols() != m.W.cols()) throw ConfigError("checkpoint: identity memory dimension mismatch");
    c.identities = mem::IdentityMemory(labels, m.W.cols(), mom);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (init[i]) c.identities.set(labels[i], V.row(static_cast<Eigen::Index>(i)).transpose());
    const auto& jq = jmem.at("queue");
    const Mat slots = mat_from_json(jq.at("slots"));
    c.queue = mem::NegativeQueue(slots.rows(), slots.cols());
    c.queue.restore(slots, jq.at("size").get<Eigen::Index>(), jq.at("cursor").get<Eigen::Index>());
    c.halves = mem::HalfPrototypes(labels, mom);
    for (const auto& h : jmem.at("halves")) {
      const int l = h.at("label").get<int>();
      if (h.contains("first")) c.halves.set(l, synth::Half::first, vec_from_json(h.at("first")));
      if (h.contains("second")) c.halves.set(l, synth::Half::second, vec_from_json(h.at("second")));
    }
    if (!j.at("mask").is_null()) {
      idselect::ChannelMask mk;
      mk.alpha = j.at("mask").get<std::vector<int>>();
      if (static_cast<Eigen::Index>(mk.alpha.size()) != m.W.cols()) throw ConfigError("checkpoint: mask length mismatch");
      c.mask = std::move(mk);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed document: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const LookupError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

void save(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("checkpoint: cannot write " + path);
  out << to_json(c).dump() << '\n';
  if (!out) throw Error("checkpoint: write failed for " + path);
}

Checkpoint load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    throw ConfigError("checkpoint: " + path + " is not valid JSON");
  }
  return from_json(j);
}

}  // namespace gps::ckpt
