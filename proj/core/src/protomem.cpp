#include "gps/protomem.hpp"

#include <cmath>
#include <string>

namespace gps::mem {
namespace {

Vec unit(const Vec& v) {
  const double n = v.norm();
  if (n == 0.0) throw DegenerateInput("prototype update produced a zero vector");
  return v / n;
}

}  // namespace

Vec momentum_update(const Vec& c, const Vec& x, double m, bool renormalize) {
  if (c.size() != x.size()) throw ContractViolation("momentum_update: dimension mismatch");
  Vec out = m * c + (1.0 - m) * x;
  return renormalize ? unit(out) : out;
}

Vec expand_series(std::span<const Vec> history, double m) {
  if (history.empty()) return {};
  const std::size_t n = history.size();
  Vec out = Vec::Zero(history.front().size());
  for (std::size_t i = 0; i < n; ++i) out += std::pow(m, static_cast<double>(n - 1 - i)) * (1.0 - m) * history[i];
  return out;
}

IdentityMemory::IdentityMemory(std::vector<int> labels, Eigen::Index dim, double momentum)
    : labels_(std::move(labels)), V_(Mat::Zero(static_cast<Eigen::Index>(labels_.size()), dim)),
      init_(labels_.size(), 0), m_(momentum) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<Eigen::Index>(i)).second)
      throw ContractViolation("IdentityMemory: duplicate label " + std::to_string(labels_[i]));
  }
}

Eigen::Index IdentityMemory::row_of(int label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw LookupError("identity memory: unknown identity " + std::to_string(label));
  return it->second;
}

void IdentityMemory::update(int label, const Vec& x) {
  const Eigen::Index r = row_of(label);
  if (x.size() != V_.cols()) throw ContractViolation("IdentityMemory::update: dimension mismatch");
  if (!init_[static_cast<std::size_t>(r)]) {
    V_.row(r) = unit(x).transpose();
    init_[static_cast<std::size_t>(r)] = 1;
    return;
  }
  V_.row(r) = momentum_update(V_.row(r).transpose(), x, m_, true).transpose();
}

void IdentityMemory::set(int label, const Vec& x) {
  const Eigen::Index r = row_of(label);
  V_.row(r) = x.transpose();
  init_[static_cast<std::size_t>(r)] = 1;
}

NegativeQueue::NegativeQueue(Eigen::Index capacity, Eigen::Index dim) : U_(Mat::Zero(capacity, dim)) {}

void NegativeQueue::push(const Vec& u) {
  if (U_.rows() == 0) return;
  if (u.size() != U_.cols()) throw ContractViolation("NegativeQueue::push: dimension mismatch");
  U_.row(cursor_) = u.transpose();
  cursor_ = (cursor_ + 1) % U_.rows();
  size_ = std::min(size_ + 1, U_.rows());
}

Mat NegativeQueue::entries() const {
  Mat out(size_, U_.cols());
  const Eigen::Index start = size_ < U_.rows() ? 0 : cursor_;
  for (Eigen::Index k = 0; k < size_; ++k) out.row(k) = U_.row((start + k) % U_.rows());
  return out;
}

void NegativeQueue::restore(const Mat& slots, Eigen::Index size, Eigen::Index cursor) {
  if (size < 0 || size > slots.rows() || cursor < 0 || (slots.rows() > 0 && cursor >= slots.rows()))
    throw ContractViolation("NegativeQueue::restore: inconsistent state");
  U_ = slots;
  size_ = size;
  cursor_ = cursor;
}

HalfPrototypes::HalfPrototypes(std::span<const int> labels, double momentum)
    : labels_(labels.begin(), labels.end()), m_(momentum) {
  for (int l : labels_) protos_[l];
}

const HalfPrototypes::Pair& HalfPrototypes::at(int label) const {
  auto it = protos_.find(label);
  if (it == protos_.end()) throw LookupError("half prototypes: unknown identity " + std::to_string(label));
  return it->second;
}

void HalfPrototypes::update(int label, synth::Half half, const Vec& x) {
  at(label);
  Pair& p = protos_[label];
  std::optional<Vec>& slot = half == synth::Half::first ? p.first : p.second;
  slot = slot ? momentum_update(*slot, x, m_, true) : unit(x);
}

std::optional<Vec> HalfPrototypes::fetch_inter_frame_positive(int label, synth::Half anchor_half) const {
  const Pair& p = at(label);
  return anchor_half == synth::Half::first ? p.second : p.first;
}

std::optional<Vec> HalfPrototypes::get(int label, synth::Half half) const {
  const Pair& p = at(label);
  return half == synth::Half::first ? p.first : p.second;
}

void HalfPrototypes::set(int label, synth::Half half, const Vec& x) {
  at(label);
  (half == synth::Half::first ? protos_[label].first : protos_[label].second) = x;
}

DomainPrototypes::DomainPrototypes(Eigen::Index domains, Eigen::Index dim, double momentum)
    : C_(Mat::Zero(domains, dim)), m_(momentum) {}

void DomainPrototypes::update(Eigen::Index domain, const Vec& x) {
  if (domain < 0 || domain >= C_.rows()) throw LookupError("domain prototypes: unknown domain " + std::to_string(domain));
  C_.row(domain) = momentum_update(C_.row(domain).transpose(), x, m_, false).transpose();
}

}  // namespace gps::mem
