#include "gps/idselect.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace gps::idselect {
namespace {

Mat softmax_rows(const Mat& logits) {
  Mat p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double mx = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

std::vector<int> class_index(const Classifier& clf, const std::vector<int>& labels) {
  std::vector<int> idx(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::lower_bound(clf.classes.begin(), clf.classes.end(), labels[i]);
    if (it == clf.classes.end() || *it != labels[i]) throw LookupError("probe: unknown label " + std::to_string(labels[i]));
    idx[i] = static_cast<int>(it - clf.classes.begin());
  }
  return idx;
}

}  // namespace

Mat Classifier::log_probs(const Mat& X) const {
  Mat logits = (X * W.transpose()).rowwise() + b.transpose();
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    logits.row(r).array() -= lse;
  }
  return logits;
}

std::vector<int> Classifier::predict(const Mat& X) const {
  const Mat logits = (X * W.transpose()).rowwise() + b.transpose();
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(r, c) > logits(r, best)) best = c;
    out[static_cast<std::size_t>(r)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

double Classifier::accuracy(const Mat& X, const std::vector<int>& labels) const {
  const auto pred = predict(X);
  int hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  return labels.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(labels.size());
}

double Classifier::mean_log_likelihood(const Mat& X, const std::vector<int>& labels) const {
  const Mat lp = log_probs(X);
  const auto idx = class_index(*this, labels);
  double s = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) s += lp(static_cast<Eigen::Index>(i), idx[i]);
  return labels.empty() ? 0.0 : s / static_cast<double>(labels.size());
}

Classifier train_probe(const Mat& prototypes, const std::vector<int>& labels, const IdselectConfig& cfg,
                       std::uint64_t seed) {
  if (static_cast<Eigen::Index>(labels.size()) != prototypes.rows())
    throw ContractViolation("train_probe: one label per prototype required");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ConfigError("train_probe: needs at least two identities");

  Classifier clf;
  clf.classes.assign(distinct.begin(), distinct.end());
  const auto C = static_cast<Eigen::Index>(clf.classes.size());
  const Eigen::Index d = prototypes.cols();
  const auto n = static_cast<double>(prototypes.rows());
  Rng rng = keyed_rng(seed, 0x70726f62);
  clf.W = Mat(C, d);
  {
    std::normal_distribution<double> nd(0.0, 0.01);
    for (Eigen::Index r = 0; r < C; ++r)
      for (Eigen::Index c = 0; c < d; ++c) clf.W(r, c) = nd(rng);
  }
  clf.b = Vec::Zero(C);

  const auto idx = class_index(clf, labels);
  Mat Y = Mat::Zero(prototypes.rows(), C);
  for (std::size_t i = 0; i < idx.size(); ++i) Y(static_cast<Eigen::Index>(i), idx[i]) = 1.0;

  for (int it = 0; it < cfg.probe_iters; ++it) {
    const Mat P = softmax_rows((prototypes * clf.W.transpose()).rowwise() + clf.b.transpose());
    const Mat G = (P - Y) / n;
    const Mat dW = G.transpose() * prototypes + cfg.probe_l2 * clf.W;
    const Vec db = G.colwise().sum().transpose();
    clf.W -= cfg.probe_lr * dW;
    clf.b -= cfg.probe_lr * db;
  }
  return clf;
}

int ChannelMask::count() const { return std::accumulate(alpha.begin(), alpha.end(), 0); }

std::vector<int> ChannelMask::kept() const {
  std::vector<int> k;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i]) k.push_back(static_cast<int>(i));
  return k;
}

std::vector<int> ChannelMask::dropped() const {
  std::vector<int> k;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (!alpha[i]) k.push_back(static_cast<int>(i));
  return k;
}

Mat apply_mask(const Mat& X, const std::vector<int>& alpha) {
  if (static_cast<Eigen::Index>(alpha.size()) != X.cols()) throw ContractViolation("apply_mask: dimension mismatch");
  Mat out = X;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (!alpha[k]) out.col(static_cast<Eigen::Index>(k)).setZero();
  return out;
}

std::vector<double> ablation_accuracy(const Mat& prototypes, const std::vector<int>& labels, const Classifier& clf) {
  std::vector<double> acc(static_cast<std::size_t>(prototypes.cols()));
  for (Eigen::Index k = 0; k < prototypes.cols(); ++k) {
    Mat m = prototypes;
    m.col(k).setZero();
    acc[static_cast<std::size_t>(k)] = clf.accuracy(m, labels);
  }
  return acc;
}

ChannelMask select_mask(const Mat& prototypes, const std::vector<int>& labels, const Classifier& clf, double t) {
  if (t < 0.0) throw ConfigError("select_mask: t must be non-negative");
  const Eigen::Index d = prototypes.cols();
  ChannelMask mask;
  mask.baseline_metric = clf.accuracy(prototypes, labels);
  if (t >= mask.baseline_metric)
    throw DegenerateInput("select_mask: t >= baseline accuracy would admit the all-zero mask");

  const double base_ll = clf.mean_log_likelihood(prototypes, labels);
  std::vector<std::tuple<double, double, Eigen::Index>> order;
  for (Eigen::Index k = 0; k < d; ++k) {
    Mat m = prototypes;
    m.col(k).setZero();
    order.emplace_back(mask.baseline_metric - clf.accuracy(m, labels), base_ll - clf.mean_log_likelihood(m, labels), k);
  }
  std::sort(order.begin(), order.end());

  mask.alpha.assign(static_cast<std::size_t>(d), 1);
  mask.retained_metric = mask.baseline_metric;
  const double floor = mask.baseline_metric - t;
  for (const auto& entry : order) {
    const auto k = static_cast<std::size_t>(std::get<2>(entry));
    mask.alpha[k] = 0;
    const double acc = mask.count() > 0 ? clf.accuracy(apply_mask(prototypes, mask.alpha), labels) : 0.0;
    if (acc < floor) {
      mask.alpha[k] = 1;
      break;
    }
    mask.retained_metric = acc;
  }
  return mask;
}

}  // namespace gps::idselect
