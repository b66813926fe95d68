#include "gps/dataset_io.hpp"

#include <fstream>

namespace gps::io {
namespace {

using nlohmann::json;
using synth::BoxAnn;
using synth::Frame;
using synth::GroundTruth;
using synth::Proposal;

json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("dataset: box must be [x,y,w,h]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!(b.w > 0 && b.h > 0)) throw ConfigError("dataset: box with non-positive size");
  return b;
}

json ann_json(const BoxAnn& b) {
  return json{{"frame_id", b.frame_id},
              {"video_id", b.video_id},
              {"domain_id", b.domain_id},
              {"box", box_json(b.box)},
              {"confidence", b.confidence},
              {"identity", b.identity ? json(*b.identity) : json(nullptr)},
              {"source", synth::to_string(b.source)},
              {"feature", vec_to_json(b.feature)}};
}

BoxAnn ann_from(const json& j) {
  BoxAnn b;
  b.frame_id = j.at("frame_id").get<int>();
  b.video_id = j.at("video_id").get<int>();
  b.domain_id = j.at("domain_id").get<int>();
  b.box = box_from(j.at("box"));
  b.confidence = j.at("confidence").get<double>();
  if (!j.at("identity").is_null()) b.identity = j.at("identity").get<int>();
  b.source = synth::source_from_string(j.at("source").get<std::string>());
  b.feature = vec_from_json(j.at("feature"));
  return b;
}

json truth_json(const GroundTruth& t) {
  return json{{"gt_identity", t.identity ? json(*t.identity) : json(nullptr)},
              {"gt_box", box_json(t.box)},
              {"person", t.person}};
}

GroundTruth truth_from(const json& j) {
  GroundTruth t;
  if (!j.at("gt_identity").is_null()) t.identity = j.at("gt_identity").get<int>();
  t.box = box_from(j.at("gt_box"));
  t.person = j.at("person").get<bool>();
  return t;
}

json frame_json(const Frame& f) {
  json boxes = json::array(), aux = json::array(), props = json::array();
  for (const auto& b : f.boxes) boxes.push_back(ann_json(b));
  for (const auto& b : f.auxiliary) aux.push_back(ann_json(b));
  for (const auto& p : f.proposals) props.push_back(json{{"box", box_json(p.box)}, {"feature", vec_to_json(p.feature)}});
  return json{{"frame_id", f.frame_id}, {"video_id", f.video_id}, {"domain_id", f.domain_id},
              {"index", f.index},       {"half", synth::to_string(f.half)},
              {"boxes", boxes},         {"auxiliary", aux},
              {"proposals", props}};
}

json frame_truth_json(const Frame& f) {
  json boxes = json::array(), aux = json::array(), props = json::array();
  for (const auto& b : f.boxes) boxes.push_back(truth_json(b.truth));
  for (const auto& b : f.auxiliary) aux.push_back(truth_json(b.truth));
  for (const auto& p : f.proposals) props.push_back(truth_json(p.truth));
  return json{{"frame_id", f.frame_id}, {"boxes", boxes}, {"auxiliary", aux}, {"proposals", props}};
}

json read_header(std::ifstream& in, const std::string& path, const char* format) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset: '" + path + "' is empty");
  json h = json::parse(line);
  if (h.value("format", "") != format) throw ConfigError("dataset: '" + path + "' is not a " + format + " file");
  if (h.value("version", 0) != kDatasetFormatVersion)
    throw ConfigError("dataset: '" + path + "' has unsupported version " + std::to_string(h.value("version", 0)));
  return h;
}

}  // namespace

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Mat mat_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Mat m(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw ConfigError("matrix: row count mismatch");
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = data[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("matrix: column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

void write_dataset(const synth::Dataset& ds, const std::string& frames_path, const std::string& truth_path,
                   const std::string& manifest_hash) {
  std::ofstream out(frames_path);
  if (!out) throw Error("dataset: cannot write '" + frames_path + "'");
  Config c;
  c.generator = ds.config;
  out << json{{"format", "gps-dataset"},
              {"version", kDatasetFormatVersion},
              {"manifest", manifest_hash},
              {"frames", ds.frames.size()},
              {"generator", config_to_json(c)["generator"]}}
             .dump()
      << '\n';
  for (const auto& f : ds.frames) out << frame_json(f).dump() << '\n';

  if (!ds.has_truth) return;
  std::ofstream t(truth_path);
  if (!t) throw Error("dataset: cannot write '" + truth_path + "'");
  t << json{{"format", "gps-truth"}, {"version", kDatasetFormatVersion}, {"manifest", manifest_hash},
            {"frames", ds.frames.size()}}
           .dump()
    << '\n';
  for (const auto& f : ds.frames) t << frame_truth_json(f).dump() << '\n';
}

synth::Dataset read_dataset(const std::string& frames_path, const std::optional<std::string>& truth_path) {
  std::ifstream in(frames_path);
  if (!in) throw ConfigError("dataset: cannot open '" + frames_path + "'");
  synth::Dataset ds;
  try {
    const json h = read_header(in, frames_path, "gps-dataset");
    ds.config = config_from_json(json{{"generator", h.at("generator")}}).generator;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      Frame f;
      f.frame_id = j.at("frame_id").get<int>();
      f.video_id = j.at("video_id").get<int>();
      f.domain_id = j.at("domain_id").get<int>();
      f.index = j.at("index").get<int>();
      f.half = synth::half_from_string(j.at("half").get<std::string>());
      for (const auto& b : j.at("boxes")) f.boxes.push_back(ann_from(b));
      for (const auto& b : j.at("auxiliary")) f.auxiliary.push_back(ann_from(b));
      for (const auto& p : j.at("proposals")) f.proposals.push_back({box_from(p.at("box")), vec_from_json(p.at("feature")), {}});
      ds.frames.push_back(std::move(f));
    }
    if (ds.frames.size() != h.at("frames").get<std::size_t>()) throw ConfigError("dataset: truncated '" + frames_path + "'");
  } catch (const json::exception& e) {
    throw ConfigError("dataset: malformed '" + frames_path + "': " + e.what());
  }

  ds.has_truth = false;
  if (!truth_path) return ds;
  std::ifstream tin(*truth_path);
  if (!tin) throw ConfigError("dataset: cannot open truth sidecar '" + *truth_path + "'");
  try {
    read_header(tin, *truth_path, "gps-truth");
    std::string line;
    std::size_t i = 0;
    while (std::getline(tin, line)) {
      if (line.empty()) continue;
      if (i >= ds.frames.size()) throw ConfigError("dataset: truth sidecar has extra frames");
      const json j = json::parse(line);
      Frame& f = ds.frames[i++];
      if (j.at("frame_id").get<int>() != f.frame_id) throw ConfigError("dataset: truth sidecar frame order mismatch");
      const auto& jb = j.at("boxes");
      const auto& ja = j.at("auxiliary");
      const auto& jp = j.at("proposals");
      if (jb.size() != f.boxes.size() || ja.size() != f.auxiliary.size() || jp.size() != f.proposals.size())
        throw ConfigError("dataset: truth sidecar box count mismatch at frame " + std::to_string(f.frame_id));
      for (std::size_t k = 0; k < jb.size(); ++k) f.boxes[k].truth = truth_from(jb[k]);
      for (std::size_t k = 0; k < ja.size(); ++k) f.auxiliary[k].truth = truth_from(ja[k]);
      for (std::size_t k = 0; k < jp.size(); ++k) f.proposals[k].truth = truth_from(jp[k]);
    }
    if (i != ds.frames.size()) throw ConfigError("dataset: truth sidecar is truncated");
  } catch (const json::exception& e) {
    throw ConfigError("dataset: malformed truth sidecar: " + std::string(e.what()));
  }
  ds.has_truth = true;
  return ds;
}

}  // namespace gps::io
