#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "gps/checkpoint.hpp"
#include "gps/dataset_io.hpp"
#include "gps/eval.hpp"
#include "gps/manifest.hpp"
#include "gps/synthdata.hpp"
#include "gps/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gps::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

struct Data {
  synth::Dataset full;
  synth::Dataset train;
  synth::Dataset heldout;
};

// Reads the dataset (the generator section of cfg is replaced by the one the
// data was made with) and splits off the held-out domain.
Data load_for(Config& cfg, const std::string& dir, bool keep_train_truth) {
  const fs::path frames = fs::path(dir) / "frames.jsonl";
  const fs::path truth = fs::path(dir) / "truth.jsonl";
  if (!fs::exists(frames)) throw ConfigError("dataset: no frames.jsonl in '" + dir + "'");
  if (!fs::exists(truth)) throw ConfigError("dataset: no truth.jsonl in '" + dir + "'");
  Data d;
  d.full = io::read_dataset(frames.string(), truth.string());
  cfg.generator = d.full.config;
  const auto doms = d.full.domains();
  if (doms.empty()) throw ConfigError("dataset: no frames");
  const int holdout = cfg.train.holdout_domain >= 0 ? cfg.train.holdout_domain : doms.back();
  auto [tr, ho] = synth::split(d.full, holdout);
  d.train = std::move(tr);
  d.heldout = std::move(ho);
  cfg.train.holdout_domain = holdout;
  if (!keep_train_truth) {
    d.train.has_truth = false;
    for (auto& f : d.train.frames) {
      for (auto& b : f.boxes) b.truth = {};
      for (auto& b : f.auxiliary) b.truth = {};
      for (auto& p : f.proposals) p.truth = {};
    }
  }
  return d;
}

json metrics_json(const eval::BenchmarkMetrics& m) {
  return {{"reid",
           {{"mAP", m.reid.mAP},
            {"top1", m.reid.top1},
            {"queries", m.queries},
            {"gallery", m.gallery},
            {"excluded_queries", m.reid.excluded.size()}}},
          {"detection",
           {{"ap", m.det.ap},
            {"recall", m.det.recall},
            {"num_gt", m.det.num_gt},
            {"matched", m.det.matched},
            {"excluded_images", m.det.excluded_images}}}};
}

const char* kEpochHeader =
    "epoch,lr,loss_total,loss_id,loss_ie,loss_cov,loss_det,batches,pseudo_examined,pseudo_added,pseudo_total,"
    "mask_size,mAP,top1,det_ap,det_recall,manifest\n";
const char* kStepHeader = "epoch,step,domain,instances,loss_total,loss_id,loss_ie,loss_cov,loss_det,manifest\n";

std::string epoch_row(const train::EpochLog& e, const std::string& hash) {
  std::ostringstream o;
  o << e.epoch << ',' << fmt(e.lr) << ',' << fmt(e.loss.total) << ',' << fmt(e.loss.id) << ',' << fmt(e.loss.ie)
    << ',' << fmt(e.loss.cov) << ',' << fmt(e.loss.det) << ',' << e.batches << ',' << e.pseudo_examined << ','
    << e.pseudo_added << ',' << e.pseudo_total << ',' << e.mask_size << ',';
  if (e.heldout) {
    o << fmt(e.heldout->reid.mAP) << ',' << fmt(e.heldout->reid.top1) << ',' << fmt(e.heldout->det.ap) << ','
      << fmt(e.heldout->det.recall);
  } else {
    o << ",,,";
  }
  o << ',' << hash << '\n';
  return o.str();
}

}  // namespace

Config resolve_config(const Overrides& o, bool seed_is_generator) {
  Config cfg = o.config_path.empty() ? Config{} : load_config(o.config_path);
  if (o.seed) (seed_is_generator ? cfg.generator.seed : cfg.train.seed) = *o.seed;
  if (o.holdout_domain) cfg.train.holdout_domain = *o.holdout_domain;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  auto& t = cfg.train.toggles;
  if (o.no_mdsbn) t.mdsbn = false;
  if (o.no_br) t.br = false;
  if (o.no_mlg) t.mlg = false;
  if (o.no_fd) t.fd = false;
  if (o.no_ie) t.ie = false;
  if (o.no_id) t.id = false;
  cfg.validate();
  return cfg;
}

int cmd_gen(const Overrides& o, const std::string& out_dir) {
  const auto t0 = Clock::now();
  const Config cfg = resolve_config(o, true);
  RunManifest man = make_manifest(cfg, "gen");
  ensure_dir(out_dir);
  synth::CorruptionLog log;
  const synth::Dataset ds = synth::corrupt(synth::generate_dataset(cfg.generator), cfg.generator, &log);
  const fs::path frames = fs::path(out_dir) / "frames.jsonl";
  const fs::path truth = fs::path(out_dir) / "truth.jsonl";
  io::write_dataset(ds, frames.string(), truth.string(), man.hash());
  man.outputs = {{"frames", frames.string()}, {"truth", truth.string()}};
  man.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  json mj = man.to_json();
  mj["corruption"] = {{"labeled_before", log.labeled_before}, {"cleared", log.cleared}, {"dropped", log.dropped},
                      {"gross", log.gross}, {"false_boxes", log.false_boxes}, {"auxiliary", log.auxiliary}};
  mj["frames"] = ds.frames.size();
  write_text(fs::path(out_dir) / "manifest.json", mj.dump(2) + "\n");
  std::cout << "wrote " << ds.frames.size() << " frames to " << out_dir << " (manifest " << man.hash() << ")\n";
  return 0;
}

int cmd_train(const Overrides& o, const std::string& data_dir, const std::string& out_dir) {
  const auto t0 = Clock::now();
  Config cfg = resolve_config(o, false);
  Data d = load_for(cfg, data_dir, false);
  RunManifest man = make_manifest(cfg, "train");
  const std::string hash = man.hash();
  ensure_dir(out_dir);
  const fs::path epochs_csv = fs::path(out_dir) / "epochs.csv";
  const fs::path steps_csv = fs::path(out_dir) / "steps.csv";
  const fs::path ckpt_path = fs::path(out_dir) / "checkpoint.json";
  const fs::path metrics_path = fs::path(out_dir) / "metrics.json";

  std::ofstream elog(epochs_csv);
  if (!elog) throw Error("cannot write '" + epochs_csv.string() + "'");
  elog << kEpochHeader;
  auto on_epoch = [&](const train::EpochLog& e) {
    elog << epoch_row(e, hash) << std::flush;
    std::cerr << "epoch " << e.epoch << " loss " << fmt(e.loss.total);
    if (e.heldout) std::cerr << " mAP " << fmt(e.heldout->reid.mAP);
    std::cerr << '\n';
  };
  train::FitResult r = train::fit(cfg, d.train, &d.heldout, on_epoch);

  std::ofstream slog(steps_csv);
  if (!slog) throw Error("cannot write '" + steps_csv.string() + "'");
  slog << kStepHeader;
  for (const auto& s : r.steps)
    slog << s.epoch << ',' << s.step << ',' << s.domain << ',' << s.instances << ',' << fmt(s.loss.total) << ','
         << fmt(s.loss.id) << ',' << fmt(s.loss.ie) << ',' << fmt(s.loss.cov) << ',' << fmt(s.loss.det) << ','
         << hash << '\n';

  ckpt::Checkpoint ck{cfg, hash, r.model, r.identities, r.queue, r.halves, r.mask};
  ckpt::save(ck, ckpt_path.string());
  json mj = metrics_json(*r.metrics);
  mj["manifest"] = hash;
  mj["heldout_domain"] = cfg.train.holdout_domain;
  write_text(metrics_path, mj.dump(2) + "\n");

  man.outputs = {{"checkpoint", ckpt_path.string()}, {"epochs", epochs_csv.string()},
                 {"steps", steps_csv.string()}, {"metrics", metrics_path.string()}};
  man.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  write_text(fs::path(out_dir) / "manifest.json", man.to_json().dump(2) + "\n");
  std::cout << json{{"mAP", r.metrics->reid.mAP}, {"top1", r.metrics->reid.top1}, {"det_ap", r.metrics->det.ap},
                    {"det_recall", r.metrics->det.recall}, {"manifest", hash}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& out_path) {
  if (!fs::exists(checkpoint)) throw ConfigError("checkpoint: '" + checkpoint + "' does not exist");
  const ckpt::Checkpoint ck = ckpt::load(checkpoint);
  Config cfg = ck.config;
  Data d = load_for(cfg, data_dir, false);
  if (cfg.generator.raw_dim != ck.model.raw_dim())
    throw ConfigError("eval: dataset raw_dim " + std::to_string(cfg.generator.raw_dim) + " does not match checkpoint " +
                      std::to_string(ck.model.raw_dim()));
  const eval::BenchmarkMetrics m = eval::evaluate_heldout(ck.model, d.heldout, cfg.eval);
  json mj = metrics_json(m);
  mj["manifest"] = ck.manifest;
  mj["heldout_domain"] = cfg.train.holdout_domain;
  const std::string text = mj.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return 0;
}

int cmd_ablate(const Overrides& o, const std::string& data_dir, const std::string& out_dir, int seeds, int jobs) {
  if (seeds < 1) throw ConfigError("ablate: --seeds must be >= 1");
  if (jobs < 1) throw ConfigError("ablate: --jobs must be >= 1");
  const auto t0 = Clock::now();
  Config cfg = resolve_config(o, false);
  Data d = load_for(cfg, data_dir, false);
  RunManifest man = make_manifest(cfg, "ablate");
  const std::string hash = man.hash();
  std::vector<std::uint64_t> seed_list;
  for (int k = 0; k < seeds; ++k) seed_list.push_back(cfg.train.seed + static_cast<std::uint64_t>(k));
  const auto rows = train::ablation_rows();
  const auto res = train::run_ablation(cfg, d.train, d.heldout, rows, seed_list, jobs);

  ensure_dir(out_dir);
  std::ostringstream table, summary;
  table << "row,mDSBN,BR,MLG,FD,IE,ID,seed,mAP,top1,AP,recall,seconds,manifest\n";
  auto flags = [](const Toggles& t) {
    std::ostringstream s;
    s << t.mdsbn << ',' << t.br << ',' << t.mlg << ',' << t.fd << ',' << t.ie << ',' << t.id;
    return s.str();
  };
  for (const auto& r : res)
    table << r.name << ',' << flags(r.toggles) << ',' << r.seed << ',' << fmt(r.metrics.reid.mAP) << ','
          << fmt(r.metrics.reid.top1) << ',' << fmt(r.metrics.det.ap) << ',' << fmt(r.metrics.det.recall) << ','
          << fmt(r.seconds) << ',' << hash << '\n';
  summary << "row,mDSBN,BR,MLG,FD,IE,ID,seeds,mAP,top1,AP,recall,manifest\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double m = 0, t1 = 0, ap = 0, rc = 0;
    for (std::size_t s = 0; s < seed_list.size(); ++s) {
      const auto& r = res[i * seed_list.size() + s];
      m += r.metrics.reid.mAP;
      t1 += r.metrics.reid.top1;
      ap += r.metrics.det.ap;
      rc += r.metrics.det.recall;
    }
    const double k = 1.0 / static_cast<double>(seed_list.size());
    summary << rows[i].name << ',' << flags(rows[i].toggles) << ',' << seed_list.size() << ',' << fmt(m * k) << ','
            << fmt(t1 * k) << ',' << fmt(ap * k) << ',' << fmt(rc * k) << ',' << hash << '\n';
  }
  const fs::path table_path = fs::path(out_dir) / "ablation.csv";
  const fs::path summary_path = fs::path(out_dir) / "ablation_summary.csv";
  write_text(table_path, table.str());
  write_text(summary_path, summary.str());
  man.outputs = {{"ablation", table_path.string()}, {"summary", summary_path.string()}};
  man.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  write_text(fs::path(out_dir) / "manifest.json", man.to_json().dump(2) + "\n");
  std::cout << summary.str();
  return 0;
}

int cmd_label_stats(const Overrides& o, const std::string& data_dir, const std::string& out_path) {
  Config cfg = resolve_config(o, false);
  Data d = load_for(cfg, data_dir, true);
  cfg.train.toggles.mlg = true;
  const std::string hash = make_manifest(cfg, "label-stats").hash();
  train::Trainer tr(cfg, d.train);
  json epochs = json::array();
  train::LabelQuality last;
  for (int e = 0; e < cfg.train.epochs; ++e) {
    const train::EpochLog log = tr.train_epoch(e);
    if (e == 0) continue;
    last = train::label_quality(tr.frames());
    epochs.push_back({{"epoch", e},
                      {"examined", log.pseudo_examined},
                      {"added", log.pseudo_added},
                      {"precision", last.precision()},
                      {"duplicate_frames", last.duplicate_frames}});
  }
  const auto st = tr.regenerate_labels();
  last = train::label_quality(tr.frames());
  json out = {{"manifest", hash},
              {"epochs", epochs},
              {"final",
               {{"examined", st.examined},
                {"added", st.added},
                {"pseudo", last.pseudo},
                {"correct", last.correct},
                {"precision", last.precision()},
                {"duplicate_frames", last.duplicate_frames}}}};
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return 0;
}

}  // namespace gps::cli
