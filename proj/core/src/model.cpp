#include "gps/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gps::model {

Eigen::Index Model::branch_for(const dsbn::Dsbn& head, int domain) const {
  if (head.branches() == 1) return 0;
  const auto it = std::find(train_domains.begin(), train_domains.end(), domain);
  if (it == train_domains.end()) throw LookupError("model: domain " + std::to_string(domain) + " has no branch");
  return static_cast<Eigen::Index>(it - train_domains.begin());
}

Model init_model(Eigen::Index raw_dim, Eigen::Index embed_dim, const std::vector<int>& train_domains,
                 bool reid_multi, bool det_multi, const DsbnConfig& bn, std::uint64_t seed) {
  if (raw_dim < 1 || embed_dim < 1) throw ConfigError("model: dimensions must be positive");
  if (train_domains.empty()) throw ConfigError("model: no training domains");
  Model m;
  Rng rng = keyed_rng(seed, 0x6d6f64656c);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(raw_dim)));
  m.W.resize(raw_dim, embed_dim);
  for (Eigen::Index i = 0; i < m.W.size(); ++i) m.W.data()[i] = nd(rng);
  const auto k = static_cast<Eigen::Index>(train_domains.size());
  m.reid = dsbn::Dsbn(reid_multi ? k : 1, embed_dim, raw_dim, bn.eps, bn.momentum, bn.temperature);
  m.det = dsbn::Dsbn(det_multi ? k : 1, raw_dim, raw_dim, bn.eps, bn.momentum, bn.temperature);
  m.det_w = Vec::Zero(raw_dim);
  m.det_R = Mat::Zero(raw_dim, 4);
  m.det_rb = Vec::Zero(4);
  m.train_domains = train_domains;
  return m;
}

namespace {

Mat normalize_rows(const Mat& y, Vec& norms) {
  norms.resize(y.rows());
  Mat x(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    norms[r] = y.row(r).norm();
    if (!(norms[r] > 0.0)) throw DegenerateInput("embed: zero-norm feature");
    x.row(r) = y.row(r) / norms[r];
  }
  return x;
}

}  // namespace

Mat embed_train(Model& m, const Mat& raw, int domain, EmbedCache* cache) {
  EmbedCache local;
  const Mat h = raw * m.W;
  local.y = m.reid.forward_train(h, m.branch_for(m.reid, domain), raw, &local.bn);
  Mat x = normalize_rows(local.y, local.norms);
  if (cache) {
    local.raw = raw;
    *cache = std::move(local);
  }
  return x;
}

Mat embed_batch(const Model& m, const Mat& raw, int domain, EmbedCache* cache) {
  EmbedCache local;
  const Mat h = raw * m.W;
  local.y = m.reid.forward_batch(h, m.branch_for(m.reid, domain), &local.bn);
  Mat x = normalize_rows(local.y, local.norms);
  if (cache) {
    local.raw = raw;
    *cache = std::move(local);
  }
  return x;
}

ModelGrads ModelGrads::zeros(const Model& m) {
  ModelGrads g;
  g.W = Mat::Zero(m.W.rows(), m.W.cols());
  g.reid_gamma = Vec::Zero(m.embed_dim());
  g.reid_beta = Vec::Zero(m.embed_dim());
  g.det_w = Vec::Zero(m.raw_dim());
  g.det_R = Mat::Zero(m.raw_dim(), 4);
  g.det_rb = Vec::Zero(4);
  g.det_gamma = Vec::Zero(m.raw_dim());
  g.det_beta = Vec::Zero(m.raw_dim());
  return g;
}

void embed_backward(const Model& m, const EmbedCache& cache, const Mat& dx, ModelGrads& g, Mat* draw) {
  Mat dy(dx.rows(), dx.cols());
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    const double n = cache.norms[r];
    const Eigen::RowVectorXd x = cache.y.row(r) / n;
    dy.row(r) = (dx.row(r) - x * x.dot(dx.row(r))) / n;
  }
  const dsbn::Grads bg = m.reid.backward(cache.bn, dy);
  g.reid_branch = cache.bn.branch;
  g.reid_gamma += bg.dgamma;
  g.reid_beta += bg.dbeta;
  g.W += cache.raw.transpose() * bg.dx;
  if (draw) *draw = bg.dx * m.W.transpose();
}

Mat embed_infer(const Model& m, const Mat& raw, std::optional<int> domain) {
  const Mat h = raw * m.W;
  Mat y;
  if (domain) {
    y = m.reid.infer_branch(h, m.branch_for(m.reid, *domain));
  } else {
    y = m.reid.infer_mixture(h, raw);
  }
  Vec norms;
  return normalize_rows(y, norms);
}

Vec embed(const Model& m, const Vec& raw, std::optional<int> domain) {
  if (raw.size() != m.raw_dim()) throw ContractViolation("embed: raw feature has wrong dimension");
  return embed_infer(m, raw.transpose(), domain).row(0).transpose();
}

namespace {

DetOutput det_head(const Model& m, const Mat& z, Vec* prob_out) {
  DetOutput out;
  const Vec logit = (z * m.det_w).array() + m.det_b;
  out.prob = logit.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  out.reg = (z * m.det_R).rowwise() + m.det_rb.transpose();
  if (prob_out) *prob_out = out.prob;
  return out;
}

}  // namespace

DetOutput detect_train(Model& m, const Mat& raw, int domain, DetCache* cache) {
  DetCache local;
  local.z = m.det.forward_train(raw, m.branch_for(m.det, domain), raw, &local.bn);
  DetOutput out = det_head(m, local.z, &local.prob);
  if (cache) *cache = std::move(local);
  return out;
}

DetOutput detect_batch(const Model& m, const Mat& raw, int domain, DetCache* cache) {
  DetCache local;
  local.z = m.det.forward_batch(raw, m.branch_for(m.det, domain), &local.bn);
  DetOutput out = det_head(m, local.z, &local.prob);
  if (cache) *cache = std::move(local);
  return out;
}

DetOutput detect_infer(const Model& m, const Mat& raw) {
  const Mat z = m.det.branches() == 1 ? m.det.infer_branch(raw, 0) : m.det.infer_mixture(raw, raw);
  return det_head(m, z, nullptr);
}

void detect_backward(const Model& m, const DetCache& cache, const Vec& dprob, const Mat& dreg, ModelGrads& g) {
  const Vec dlogit = dprob.cwiseProduct(cache.prob.cwiseProduct((1.0 - cache.prob.array()).matrix()));
  g.det_w += cache.z.transpose() * dlogit;
  g.det_b += dlogit.sum();
  g.det_R += cache.z.transpose() * dreg;
  g.det_rb += dreg.colwise().sum().transpose();
  const Mat dz = dlogit * m.det_w.transpose() + dreg * m.det_R.transpose();
  const dsbn::Grads bg = m.det.backward(cache.bn, dz);
  g.det_branch = cache.bn.branch;
  g.det_gamma += bg.dgamma;
  g.det_beta += bg.dbeta;
}

Sgd::Sgd(const Model& m, double momentum, double weight_decay) : mu_(momentum), wd_(weight_decay) {
  v_ = ModelGrads::zeros(m);
  for (Eigen::Index i = 0; i < m.reid.branches(); ++i) {
    reid_vg_.push_back(Vec::Zero(m.embed_dim()));
    reid_vb_.push_back(Vec::Zero(m.embed_dim()));
  }
  for (Eigen::Index i = 0; i < m.det.branches(); ++i) {
    det_vg_.push_back(Vec::Zero(m.raw_dim()));
    det_vb_.push_back(Vec::Zero(m.raw_dim()));
  }
}

namespace {

template <class P, class G, class V>
void sgd_apply(P& p, const G& g, V& v, double mu, double wd, double lr) {
  v = mu * v + g + wd * p;
  p -= lr * v;
}

}  // namespace

void Sgd::step(Model& m, const ModelGrads& g, double lr) {
  sgd_apply(m.W, g.W, v_.W, mu_, wd_, lr);
  sgd_apply(m.det_w, g.det_w, v_.det_w, mu_, wd_, lr);
  sgd_apply(m.det_R, g.det_R, v_.det_R, mu_, wd_, lr);
  v_.det_b = mu_ * v_.det_b + g.det_b;
  m.det_b -= lr * v_.det_b;
  v_.det_rb = mu_ * v_.det_rb + g.det_rb;
  m.det_rb -= lr * v_.det_rb;
  const auto rb = static_cast<std::size_t>(g.reid_branch);
  auto& reid = m.reid.branch(g.reid_branch);
  reid_vg_[rb] = mu_ * reid_vg_[rb] + g.reid_gamma;
  reid.gamma -= lr * reid_vg_[rb];
  reid_vb_[rb] = mu_ * reid_vb_[rb] + g.reid_beta;
  reid.beta -= lr * reid_vb_[rb];
  const auto db = static_cast<std::size_t>(g.det_branch);
  auto& det = m.det.branch(g.det_branch);
  det_vg_[db] = mu_ * det_vg_[db] + g.det_gamma;
  det.gamma -= lr * det_vg_[db];
  det_vb_[db] = mu_ * det_vb_[db] + g.det_beta;
  det.beta -= lr * det_vb_[db];
}

}  // namespace gps::model
