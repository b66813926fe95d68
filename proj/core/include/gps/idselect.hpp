#pragma once

#include <cstdint>
#include <vector>

#include "gps/common.hpp"
#include "gps/config.hpp"

namespace gps::idselect {

// Multinomial logistic probe over prototype rows.
struct Classifier {
  Mat W;  // classes x d
  Vec b;  // classes
  std::vector<int> classes;

  Mat log_probs(const Mat& X) const;
  std::vector<int> predict(const Mat& X) const;
  double accuracy(const Mat& X, const std::vector<int>& labels) const;
  double mean_log_likelihood(const Mat& X, const std::vector<int>& labels) const;
};

// Fits the probe on (prototypes, labels) by full-batch gradient descent.
// Labels index into `classes` (the sorted distinct labels). Throws
// ConfigError with fewer than two identities.
Classifier train_probe(const Mat& prototypes, const std::vector<int>& labels, const IdselectConfig& cfg,
                       std::uint64_t seed);

struct ChannelMask {
  std::vector<int> alpha;  // 0/1 per dimension
  double retained_metric = 0.0;
  double baseline_metric = 0.0;

  int count() const;
  std::vector<int> kept() const;
  std::vector<int> dropped() const;
};

Mat apply_mask(const Mat& X, const std::vector<int>& alpha);

// Single-dimension ablation: accuracy with dimension k zeroed, per k.
std::vector<double> ablation_accuracy(const Mat& prototypes, const std::vector<int>& labels, const Classifier& clf);

// Greedy backward elimination. Dimensions are ranked once by their
// single-dimension ablation cost (accuracy drop, then log-likelihood drop,
// then index) and removed in that order until the next removal would push
// accuracy below baseline - t. Throws DegenerateInput when t >= baseline.
ChannelMask select_mask(const Mat& prototypes, const std::vector<int>& labels, const Classifier& clf, double t);

}  // namespace gps::idselect
