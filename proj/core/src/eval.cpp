#include "gps/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace gps::eval {

RetrievalResult retrieval_metrics(std::span<const QueryItem> queries, std::span<const GalleryItem> gallery) {
  RetrievalResult res;
  double ap_sum = 0.0, top1_sum = 0.0;
  std::vector<double> sim(gallery.size());
  std::vector<int> order;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const QueryItem& q = queries[qi];
    const double qn = q.embedding.norm();
    order.clear();
    int positives = 0;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (q.det_id >= 0 && gallery[g].det_id == q.det_id) continue;
      const double gn = gallery[g].embedding.norm();
      sim[g] = (qn > 0.0 && gn > 0.0) ? q.embedding.dot(gallery[g].embedding) / (qn * gn) : 0.0;
      order.push_back(static_cast<int>(g));
      positives += gallery[g].identity == q.identity ? 1 : 0;
    }
    if (positives == 0) {
      res.excluded.push_back(static_cast<int>(qi));
      continue;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sim[a] > sim[b]; });
    double ap = 0.0;
    int hits = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (gallery[order[k]].identity != q.identity) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    ap /= positives;
    res.ap.push_back(ap);
    res.evaluated.push_back(static_cast<int>(qi));
    ap_sum += ap;
    top1_sum += gallery[order.front()].identity == q.identity ? 1.0 : 0.0;
  }
  if (!res.ap.empty()) {
    res.mAP = ap_sum / static_cast<double>(res.ap.size());
    res.top1 = top1_sum / static_cast<double>(res.ap.size());
  }
  return res;
}

namespace {

struct Ranked {
  double score;
  std::size_t image;
  std::size_t index;
};

double all_points_ap(const std::vector<char>& tp, int num_gt) {
  if (num_gt == 0 || tp.empty()) return 0.0;
  std::vector<double> prec(tp.size()), rec(tp.size());
  int cum = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    cum += tp[i];
    prec[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
    rec[i] = static_cast<double>(cum) / static_cast<double>(num_gt);
  }
  for (std::size_t i = tp.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  double ap = 0.0, prev_r = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    ap += (rec[i] - prev_r) * prec[i];
    prev_r = rec[i];
  }
  return ap;
}

}  // namespace

DetectionResult detection_metrics(const std::vector<std::vector<Detection>>& pred,
                                  const std::vector<std::vector<Box>>& gt, double iou_min) {
  if (pred.size() != gt.size()) throw ContractViolation("detection_metrics: one prediction list per image required");
  DetectionResult res;
  std::vector<Ranked> ranked;
  for (std::size_t im = 0; im < pred.size(); ++im) {
    if (gt[im].empty()) ++res.excluded_images;
    res.num_gt += static_cast<int>(gt[im].size());
    for (std::size_t i = 0; i < pred[im].size(); ++i) ranked.push_back({pred[im][i].score, im, i});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  std::vector<std::vector<char>> taken(gt.size());
  for (std::size_t im = 0; im < gt.size(); ++im) taken[im].assign(gt[im].size(), 0);
  std::vector<char> tp;
  tp.reserve(ranked.size());
  for (const Ranked& r : ranked) {
    const Box& pb = pred[r.image][r.index].box;
    int best = -1;
    double best_iou = iou_min;
    for (std::size_t g = 0; g < gt[r.image].size(); ++g) {
      if (taken[r.image][g]) continue;
      const double o = iou(pb, gt[r.image][g]);
      if (o >= best_iou && (best < 0 || o > best_iou)) {
        best = static_cast<int>(g);
        best_iou = o;
      }
    }
    if (best >= 0) {
      taken[r.image][static_cast<std::size_t>(best)] = 1;
      ++res.matched;
    }
    tp.push_back(best >= 0 ? 1 : 0);
  }
  res.ap = all_points_ap(tp, res.num_gt);
  res.recall = res.num_gt > 0 ? static_cast<double>(res.matched) / res.num_gt : 0.0;
  return res;
}

DetectionResult detection_metrics(std::span<const Detection> pred, std::span<const Box> gt, double iou_min) {
  return detection_metrics(std::vector<std::vector<Detection>>{{pred.begin(), pred.end()}},
                           std::vector<std::vector<Box>>{{gt.begin(), gt.end()}}, iou_min);
}

BenchmarkMetrics evaluate_heldout(const model::Model& m, const synth::Dataset& heldout, const EvalConfig& cfg) {
  if (!heldout.has_truth) throw ConfigError("eval: held-out evaluation needs the ground-truth sidecar");
  BenchmarkMetrics out;
  std::vector<GalleryItem> gallery;
  std::vector<std::vector<Detection>> preds;
  std::vector<std::vector<Box>> gts;
  for (const synth::Frame& f : heldout.frames) {
    if (f.proposals.empty()) {
      preds.emplace_back();
      gts.emplace_back();
      continue;
    }
    Mat raw(static_cast<Eigen::Index>(f.proposals.size()), m.raw_dim());
    for (std::size_t i = 0; i < f.proposals.size(); ++i) {
      if (f.proposals[i].feature.size() != m.raw_dim())
        throw ConfigError("eval: dataset feature dimension does not match the model");
      raw.row(static_cast<Eigen::Index>(i)) = f.proposals[i].feature.transpose();
    }
    const Mat emb = model::embed_infer(m, raw);
    const model::DetOutput det = model::detect_infer(m, raw);
    std::vector<Detection> fp;
    std::vector<Box> fg;
    for (std::size_t i = 0; i < f.proposals.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const synth::Proposal& p = f.proposals[i];
      fp.push_back({decode_box(p.box, det.reg.row(r).transpose()), det.prob[r]});
      if (!p.truth.person) continue;
      fg.push_back(p.truth.box);
      if (p.truth.identity) {
        GalleryItem g;
        g.embedding = emb.row(r).transpose();
        g.identity = *p.truth.identity;
        g.frame_id = f.frame_id;
        g.det_id = static_cast<int>(gallery.size());
        gallery.push_back(std::move(g));
      }
    }
    preds.push_back(std::move(fp));
    gts.push_back(std::move(fg));
  }

  std::map<int, std::vector<int>> by_identity;
  for (const auto& g : gallery) by_identity[g.identity].push_back(g.det_id);
  Rng rng = keyed_rng(cfg.query_seed, 0x7175657279);
  std::vector<QueryItem> queries;
  for (const auto& [id, dets] : by_identity) {
    std::uniform_int_distribution<std::size_t> pick(0, dets.size() - 1);
    const GalleryItem& g = gallery[static_cast<std::size_t>(dets[pick(rng)])];
    queries.push_back({g.embedding, id, g.det_id});
  }
  out.reid = retrieval_metrics(queries, gallery);
  out.det = detection_metrics(preds, gts, cfg.iou_min);
  out.queries = static_cast<int>(queries.size());
  out.gallery = static_cast<int>(gallery.size());
  return out;
}

}  // namespace gps::eval
