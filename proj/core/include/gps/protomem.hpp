#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gps/common.hpp"
#include "gps/synthdata.hpp"

namespace gps::mem {

// c <- m c + (1 - m) x, optionally renormalised to unit length.
Vec momentum_update(const Vec& c, const Vec& x, double m, bool renormalize);

// Closed form of n raw momentum updates from a zero prototype:
// sum_i m^(n-i) (1-m) x_i.
Vec expand_series(std::span<const Vec> history, double m);

// One unit-norm prototype per labeled identity. Rows start unset and are
// initialised from the first observed feature.
class IdentityMemory {
 public:
  IdentityMemory() = default;
  IdentityMemory(std::vector<int> labels, Eigen::Index dim, double momentum);

  bool contains(int label) const { return index_.count(label) != 0; }
  Eigen::Index row_of(int label) const;  // LookupError if unknown
  Eigen::Index size() const { return V_.rows(); }
  Eigen::Index dim() const { return V_.cols(); }
  double momentum() const { return m_; }
  const std::vector<int>& labels() const { return labels_; }
  bool initialized(int label) const { return init_[static_cast<std::size_t>(row_of(label))] != 0; }

  void update(int label, const Vec& x);
  void set(int label, const Vec& x);
  Vec prototype(int label) const { return V_.row(row_of(label)).transpose(); }
  // Matrix of initialised rows only, plus the label of each row.
  const Mat& matrix() const { return V_; }
  const std::vector<char>& init_flags() const { return init_; }

 private:
  std::vector<int> labels_;
  std::unordered_map<int, Eigen::Index> index_;
  Mat V_;
  std::vector<char> init_;
  double m_ = 0.9;
};

// Fixed-capacity FIFO of unlabeled-instance features.
class NegativeQueue {
 public:
  NegativeQueue() = default;
  NegativeQueue(Eigen::Index capacity, Eigen::Index dim);

  void push(const Vec& u);
  Eigen::Index size() const { return size_; }
  Eigen::Index capacity() const { return U_.rows(); }
  Eigen::Index cursor() const { return cursor_; }
  // Occupied slots only, ordered oldest first.
  Mat entries() const;
  const Mat& slots() const { return U_; }
  void restore(const Mat& slots, Eigen::Index size, Eigen::Index cursor);

 private:
  Mat U_;
  Eigen::Index size_ = 0;
  Eigen::Index cursor_ = 0;
};

// Two prototypes per identity, one per half of the video.
class HalfPrototypes {
 public:
  HalfPrototypes() = default;
  HalfPrototypes(std::span<const int> labels, double momentum);

  void update(int label, synth::Half half, const Vec& x);
  // The opposite half's prototype, or nullopt if that half was never seen.
  std::optional<Vec> fetch_inter_frame_positive(int label, synth::Half anchor_half) const;
  std::optional<Vec> get(int label, synth::Half half) const;
  void set(int label, synth::Half half, const Vec& x);
  const std::vector<int>& labels() const { return labels_; }
  double momentum() const { return m_; }

 private:
  struct Pair {
    std::optional<Vec> first;
    std::optional<Vec> second;
  };
  const Pair& at(int label) const;
  std::vector<int> labels_;
  std::unordered_map<int, Pair> protos_;
  double m_ = 0.9;
};

// Raw (not renormalised) per-domain backbone prototypes.
class DomainPrototypes {
 public:
  DomainPrototypes() = default;
  DomainPrototypes(Eigen::Index domains, Eigen::Index dim, double momentum);

  void update(Eigen::Index domain, const Vec& x);
  const Mat& matrix() const { return C_; }
  Mat& matrix() { return C_; }
  double momentum() const { return m_; }

 private:
  Mat C_;
  double m_ = 0.9;
};

}  // namespace gps::mem
