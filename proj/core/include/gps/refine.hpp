#pragma once

#include <span>
#include <vector>

#include "gps/config.hpp"
#include "gps/synthdata.hpp"

namespace gps::refine {

using synth::BoxAnn;

// Auxiliary boxes overlapping a primary box at IoU >= merge_iou_threshold are
// duplicates: the primary geometry and identity survive and the confidence
// becomes the max of the pair. Every other auxiliary box is appended
// unlabeled.
std::vector<BoxAnn> merge_sources(std::span<const BoxAnn> primary, std::span<const BoxAnn> auxiliary,
                                  const RefineConfig& cfg);

// Drops boxes with confidence < hard_conf_min, order preserved.
std::vector<BoxAnn> hard_filter(std::span<const BoxAnn> boxes, const RefineConfig& cfg);

struct DetLoss {
  double value = 0.0;
  Vec grad_scores;     // dL/dscore (w.r.t. probabilities)
  Mat grad_reg;        // n x 4, dL/dreg_pred
};

// Confidence-weighted BCE + smooth-L1 (positives only), normalised by the
// weight sum. scores are probabilities; reg_* are n x 4.
DetLoss weighted_det_loss(const Vec& scores, const Vec& cls_targets, const Mat& reg_pred, const Mat& reg_target,
                          const Vec& weights);

}  // namespace gps::refine
