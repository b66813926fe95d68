#pragma once

#include <span>
#include <vector>

#include "gps/config.hpp"
#include "gps/model.hpp"
#include "gps/synthdata.hpp"

namespace gps::eval {

struct QueryItem {
  Vec embedding;
  int identity = 0;
  int det_id = -1;  // excluded from this query's gallery when >= 0
};

struct GalleryItem {
  Vec embedding;
  int identity = -1;
  int frame_id = 0;
  int det_id = -1;
};

struct RetrievalResult {
  std::vector<double> ap;          // per evaluated query
  std::vector<int> evaluated;      // query indices behind `ap`
  std::vector<int> excluded;       // queries without any gallery positive
  double mAP = 0.0;
  double top1 = 0.0;
};

// Cosine ranking, ties broken by gallery index. AP is the mean of
// precision@k over the ranks k holding a positive.
RetrievalResult retrieval_metrics(std::span<const QueryItem> queries, std::span<const GalleryItem> gallery);

struct Detection {
  Box box;
  double score = 0.0;
};

struct DetectionResult {
  double ap = 0.0;
  double recall = 0.0;
  int num_gt = 0;
  int matched = 0;
  int excluded_images = 0;  // images without ground truth
};

// One image. Predictions are visited by descending score (stable) and each
// claims the unmatched ground-truth box of highest IoU, if that IoU reaches
// iou_min. AP uses all-points interpolation.
DetectionResult detection_metrics(std::span<const Detection> pred, std::span<const Box> gt, double iou_min = 0.5);

// Pooled over images: one score ranking, matching within each image.
DetectionResult detection_metrics(const std::vector<std::vector<Detection>>& pred,
                                  const std::vector<std::vector<Box>>& gt, double iou_min = 0.5);

struct BenchmarkMetrics {
  RetrievalResult reid;
  DetectionResult det;
  int queries = 0;
  int gallery = 0;
};

// Held-out protocol: the gallery is every person proposal of the held-out
// frames, one seeded query per identity is pulled out of it. Detection runs
// the scorer and regressor over all proposals. Needs ground truth.
BenchmarkMetrics evaluate_heldout(const model::Model& m, const synth::Dataset& heldout, const EvalConfig& cfg);

}  // namespace gps::eval
