#include "gps/dsbn.hpp"

#include <cmath>
#include <string>

namespace gps::dsbn {

Dsbn::Dsbn(Eigen::Index branches, Eigen::Index channels, Eigen::Index backbone_dim, double eps, double momentum,
           double temperature)
    : prototypes_(branches, backbone_dim, momentum), channels_(channels), eps_(eps), momentum_(momentum),
      temperature_(temperature) {
  if (branches < 1) throw ConfigError("dsbn: needs at least one branch");
  branches_.resize(static_cast<std::size_t>(branches));
  for (auto& b : branches_) {
    b.gamma = Vec::Ones(channels);
    b.beta = Vec::Zero(channels);
    b.running_mean = Vec::Zero(channels);
    b.running_var = Vec::Ones(channels);
  }
}

Mat Dsbn::forward_batch(const Mat& x, Eigen::Index bi, TrainCache* cache) const {
  if (x.rows() == 0) throw ContractViolation("dsbn: empty batch");
  if (x.cols() != channels_) throw ContractViolation("dsbn: channel mismatch");
  const Branch& b = branch(bi);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Mat xc = x.rowwise() - mu;
  const Eigen::RowVectorXd var = xc.array().square().colwise().mean();
  const Vec inv_std = (var.transpose().array() + eps_).rsqrt().matrix();
  Mat x_hat = xc * inv_std.asDiagonal();
  Mat y = (x_hat * b.gamma.asDiagonal()).rowwise() + b.beta.transpose();
  if (cache) {
    cache->branch = bi;
    cache->x_hat = std::move(x_hat);
    cache->inv_std = inv_std;
  }
  return y;
}

Mat Dsbn::forward_train(const Mat& x, Eigen::Index bi, const Mat& backbone, TrainCache* cache) {
  TrainCache local;
  Mat y = forward_batch(x, bi, &local);
  Branch& b = branch(bi);
  const Eigen::Index n = x.rows();
  const Vec mu = x.colwise().mean().transpose();
  Vec var = (x.rowwise() - mu.transpose()).array().square().colwise().mean().transpose();
  if (n > 1) var *= static_cast<double>(n) / static_cast<double>(n - 1);
  if (!b.populated) {
    b.running_mean = mu;
    b.running_var = var;
    b.populated = true;
  } else {
    b.running_mean = momentum_ * b.running_mean + (1.0 - momentum_) * mu;
    b.running_var = momentum_ * b.running_var + (1.0 - momentum_) * var;
  }
  if (backbone.rows() > 0) prototypes_.update(bi, backbone.colwise().mean().transpose());
  if (cache) *cache = std::move(local);
  return y;
}

Grads Dsbn::backward(const TrainCache& cache, const Mat& dy) const {
  const Branch& b = branch(cache.branch);
  Grads g;
  g.dbeta = dy.colwise().sum().transpose();
  g.dgamma = dy.cwiseProduct(cache.x_hat).colwise().sum().transpose();
  const Mat dxh = dy * b.gamma.asDiagonal();
  const Eigen::RowVectorXd mean_dxh = dxh.colwise().mean();
  const Eigen::RowVectorXd mean_dxh_xh = dxh.cwiseProduct(cache.x_hat).colwise().mean();
  Mat t = dxh.rowwise() - mean_dxh;
  t -= cache.x_hat * mean_dxh_xh.asDiagonal();
  g.dx = t * cache.inv_std.asDiagonal();
  return g;
}

Mat Dsbn::infer_branch(const Mat& x, Eigen::Index bi) const {
  const Branch& b = branch(bi);
  if (!b.populated) throw InferenceError("dsbn: branch for domain " + std::to_string(bi) + " has no running statistics");
  if (x.cols() != channels_) throw ContractViolation("dsbn: channel mismatch");
  Mat y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < channels_; ++c) {
    const double s = std::sqrt(b.running_var[c] + eps_);
    for (Eigen::Index r = 0; r < x.rows(); ++r) y(r, c) = b.gamma[c] * ((x(r, c) - b.running_mean[c]) / s) + b.beta[c];
  }
  return y;
}

Mat Dsbn::zeta(const Mat& backbone) const {
  const Eigen::Index K = branches();
  Mat z(backbone.rows(), K);
  const Mat& C = prototypes_.matrix();
  for (Eigen::Index r = 0; r < backbone.rows(); ++r) {
    if (K == 1) {
      z(r, 0) = 1.0;
      continue;
    }
    const double xn = backbone.row(r).norm();
    Vec s(K);
    for (Eigen::Index i = 0; i < K; ++i) {
      const double cn = C.row(i).norm();
      s[i] = (xn > 0.0 && cn > 0.0) ? backbone.row(r).dot(C.row(i)) / (xn * cn) / temperature_ : 0.0;
    }
    const Vec e = (s.array() - s.maxCoeff()).exp().matrix();
    z.row(r) = (e / e.sum()).transpose();
  }
  return z;
}

Mat Dsbn::infer_mixture(const Mat& x, const Mat& backbone) const {
  if (backbone.rows() != x.rows()) throw ContractViolation("dsbn: one backbone feature per row required");
  const Mat z = zeta(backbone);
  Mat y = infer_branch(x, 0);
  for (Eigen::Index r = 0; r < y.rows(); ++r) y.row(r) *= z(r, 0);
  for (Eigen::Index i = 1; i < branches(); ++i) {
    const Mat yi = infer_branch(x, i);
    for (Eigen::Index r = 0; r < y.rows(); ++r) y.row(r) += z(r, i) * yi.row(r);
  }
  return y;
}

}  // namespace gps::dsbn
