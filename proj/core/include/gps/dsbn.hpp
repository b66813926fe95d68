#pragma once

#include <vector>

#include "gps/common.hpp"
#include "gps/protomem.hpp"

namespace gps::dsbn {

struct Branch {
  Vec gamma;
  Vec beta;
  Vec running_mean;
  Vec running_var;
  bool populated = false;
};

// Saved activations of a training forward pass, consumed by backward().
struct TrainCache {
  Eigen::Index branch = 0;
  Mat x_hat;    // n x C standardised input
  Vec inv_std;  // C
};

struct Grads {
  Mat dx;
  Vec dgamma;
  Vec dbeta;
};

// Domain-specific batch normalisation over C channels with one branch per
// training domain. Training normalises with the batch's own statistics in
// the batch's branch; inference mixes every branch with weights
// zeta = softmax(cos(backbone, C_i) / T).
class Dsbn {
 public:
  Dsbn() = default;
  Dsbn(Eigen::Index branches, Eigen::Index channels, Eigen::Index backbone_dim, double eps, double momentum,
       double temperature);

  Eigen::Index branches() const { return static_cast<Eigen::Index>(branches_.size()); }
  Eigen::Index channels() const { return channels_; }
  double eps() const { return eps_; }
  double momentum() const { return momentum_; }
  double temperature() const { return temperature_; }

  // backbone: n x d_b features whose batch mean updates this branch's
  // domain prototype.
  Mat forward_train(const Mat& x, Eigen::Index branch, const Mat& backbone, TrainCache* cache);
  // Batch-statistics forward without touching running state.
  Mat forward_batch(const Mat& x, Eigen::Index branch, TrainCache* cache) const;
  Grads backward(const TrainCache& cache, const Mat& dy) const;

  // Branch i with its running statistics.
  Mat infer_branch(const Mat& x, Eigen::Index branch) const;
  // Per-row mixture weights.
  Mat zeta(const Mat& backbone) const;
  Mat infer_mixture(const Mat& x, const Mat& backbone) const;

  Branch& branch(Eigen::Index i) { return branches_.at(static_cast<std::size_t>(i)); }
  const Branch& branch(Eigen::Index i) const { return branches_.at(static_cast<std::size_t>(i)); }
  mem::DomainPrototypes& prototypes() { return prototypes_; }
  const mem::DomainPrototypes& prototypes() const { return prototypes_; }

 private:
  std::vector<Branch> branches_;
  mem::DomainPrototypes prototypes_;
  Eigen::Index channels_ = 0;
  double eps_ = 1e-5;
  double momentum_ = 0.9;
  double temperature_ = 1.0;
};

}  // namespace gps::dsbn
