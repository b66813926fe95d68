#pragma once

#include <optional>
#include <vector>

#include "gps/config.hpp"
#include "gps/dsbn.hpp"

namespace gps::model {

// Linear embedder with a DSBN ReID head, plus a logistic box scorer and a
// 4-offset regressor behind a DSBN detection head.
struct Model {
  Mat W;            // raw_dim x embed_dim
  dsbn::Dsbn reid;  // embed_dim channels
  Vec det_w;        // raw_dim
  double det_b = 0.0;
  Mat det_R;        // raw_dim x 4
  Vec det_rb;       // 4
  dsbn::Dsbn det;   // raw_dim channels
  std::vector<int> train_domains;  // branch -> domain id, when multi-branch

  Eigen::Index raw_dim() const { return W.rows(); }
  Eigen::Index embed_dim() const { return W.cols(); }
  // Branch of a training domain in a head, 0 for single-branch heads.
  Eigen::Index branch_for(const dsbn::Dsbn& head, int domain) const;
};

// Random init: W ~ N(0, 1/raw_dim), detector weights zero. reid_branches and
// det_branches are |train_domains| or 1.
Model init_model(Eigen::Index raw_dim, Eigen::Index embed_dim, const std::vector<int>& train_domains,
                 bool reid_multi, bool det_multi, const DsbnConfig& bn, std::uint64_t seed);

struct EmbedCache {
  Mat raw;
  Mat y;  // DSBN output before normalisation
  Vec norms;
  dsbn::TrainCache bn;
};

// Training path: batch statistics, running-stat update. Rows of the result
// are unit norm.
Mat embed_train(Model& m, const Mat& raw, int domain, EmbedCache* cache);
// Same maths without mutating running state (used by gradient checks).
Mat embed_batch(const Model& m, const Mat& raw, int domain, EmbedCache* cache);

struct ModelGrads {
  Mat W;
  Vec reid_gamma, reid_beta;
  Vec det_w;
  double det_b = 0.0;
  Mat det_R;
  Vec det_rb;
  Vec det_gamma, det_beta;
  Eigen::Index reid_branch = 0, det_branch = 0;

  static ModelGrads zeros(const Model& m);
};

// Back-propagates dL/dx (n x embed_dim) through normalisation, DSBN and W.
void embed_backward(const Model& m, const EmbedCache& cache, const Mat& dx, ModelGrads& g, Mat* draw = nullptr);

// Inference: running statistics of one branch, or the zeta mixture when
// branch is nullopt. Throws DegenerateInput on a zero pre-norm vector.
Mat embed_infer(const Model& m, const Mat& raw, std::optional<int> domain = std::nullopt);
Vec embed(const Model& m, const Vec& raw, std::optional<int> domain = std::nullopt);

struct DetCache {
  Mat z;
  Vec prob;
  dsbn::TrainCache bn;
};

struct DetOutput {
  Vec prob;  // person probability per row
  Mat reg;   // n x 4 offsets
};

DetOutput detect_train(Model& m, const Mat& raw, int domain, DetCache* cache);
DetOutput detect_batch(const Model& m, const Mat& raw, int domain, DetCache* cache);
DetOutput detect_infer(const Model& m, const Mat& raw);
void detect_backward(const Model& m, const DetCache& cache, const Vec& dprob, const Mat& dreg, ModelGrads& g);

// SGD with momentum and weight decay: v = mu v + g + wd p; p -= lr v.
class Sgd {
 public:
  Sgd() = default;
  Sgd(const Model& m, double momentum, double weight_decay);
  void step(Model& m, const ModelGrads& g, double lr);

 private:
  ModelGrads v_;
  std::vector<Vec> reid_vg_, reid_vb_, det_vg_, det_vb_;
  double mu_ = 0.9;
  double wd_ = 0.0;
};

}  // namespace gps::model
