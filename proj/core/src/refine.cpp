#include "gps/refine.hpp"

#include <algorithm>
#include <cmath>

namespace gps::refine {
namespace {

constexpr double kProbFloor = 1e-12;

double smooth_l1(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

double smooth_l1_grad(double d) {
  if (d > 1.0) return 1.0;
  if (d < -1.0) return -1.0;
  return d;
}

}  // namespace

std::vector<BoxAnn> merge_sources(std::span<const BoxAnn> primary, std::span<const BoxAnn> auxiliary,
                                  const RefineConfig& cfg) {
  std::vector<BoxAnn> out(primary.begin(), primary.end());
  // Pass 1: an auxiliary box is new iff nothing already kept overlaps it.
  for (const BoxAnn& a : auxiliary) {
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const BoxAnn& e) {
      return iou(e.box, a.box) >= cfg.merge_iou_threshold;
    });
    if (duplicate) continue;
    BoxAnn b = a;
    b.identity.reset();
    out.push_back(std::move(b));
  }
  // Pass 2: every kept box takes the max confidence over the auxiliary boxes
  // that duplicate it. Doing this after the append pass keeps the merge
  // idempotent.
  for (BoxAnn& e : out) {
    for (const BoxAnn& a : auxiliary)
      if (iou(e.box, a.box) >= cfg.merge_iou_threshold) e.confidence = std::max(e.confidence, a.confidence);
  }
  return out;
}

std::vector<BoxAnn> hard_filter(std::span<const BoxAnn> boxes, const RefineConfig& cfg) {
  std::vector<BoxAnn> out;
  out.reserve(boxes.size());
  std::copy_if(boxes.begin(), boxes.end(), std::back_inserter(out),
               [&](const BoxAnn& b) { return b.confidence >= cfg.hard_conf_min; });
  return out;
}

DetLoss weighted_det_loss(const Vec& scores, const Vec& cls_targets, const Mat& reg_pred, const Mat& reg_target,
                          const Vec& weights) {
  const Eigen::Index n = scores.size();
  if (cls_targets.size() != n || weights.size() != n || reg_pred.rows() != n || reg_target.rows() != n ||
      reg_pred.cols() != 4 || reg_target.cols() != 4)
    throw ContractViolation("weighted_det_loss: input lengths differ");

  DetLoss out;
  out.grad_scores = Vec::Zero(n);
  out.grad_reg = Mat::Zero(n, 4);
  const double wsum = weights.sum();
  if (wsum <= 0.0) return out;

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double p = std::clamp(scores[i], kProbFloor, 1.0 - kProbFloor);
    const double y = cls_targets[i];
    total += w * -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    out.grad_scores[i] = w * (-(y / p) + (1.0 - y) / (1.0 - p)) / wsum;
    if (y > 0.5) {
      for (int k = 0; k < 4; ++k) {
        const double d = reg_pred(i, k) - reg_target(i, k);
        total += w * smooth_l1(d);
        out.grad_reg(i, k) = w * smooth_l1_grad(d) / wsum;
      }
    }
  }
  out.value = total / wsum;
  return out;
}

}  // namespace gps::refine
