#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gps/common.hpp"
#include "gps/config.hpp"

namespace gps::testing {

inline double rel_err(const Mat& a, const Mat& b) {
  const double s = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / s;
}

// Central differences of f at x, entry by entry.
inline Mat numeric_grad(const Mat& x, const std::function<double(const Mat&)>& f, double h = 1e-5) {
  Mat g(x.rows(), x.cols());
  Mat xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = xp.data()[i];
    xp.data()[i] = v + h;
    const double fp = f(xp);
    xp.data()[i] = v - h;
    const double fm = f(xp);
    xp.data()[i] = v;
    g.data()[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Mat gaussian_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

inline Vec unit_vec(Rng& rng, Eigen::Index n) {
  Vec v = gaussian_vec(rng, n);
  return v / v.norm();
}

// Probe rows whose identity signal lives only in the first `signal` dims;
// the remaining dims are unit Gaussian noise.
struct PlantedProbe {
  Mat X;
  std::vector<int> labels;
};

inline PlantedProbe planted_probe(Rng& rng, int identities, int per_id, int dims, int signal) {
  PlantedProbe p;
  p.X = Mat::Zero(identities * per_id, dims);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < identities; ++i) {
    Vec mean = Vec::Zero(dims);
    for (int k = 0; k < signal; ++k) mean[k] = 2.0 * nd(rng);
    for (int s = 0; s < per_id; ++s) {
      const int r = i * per_id + s;
      for (int k = 0; k < dims; ++k) p.X(r, k) = k < signal ? mean[k] + 0.3 * nd(rng) : nd(rng);
      p.labels.push_back(10 + i);
    }
  }
  return p;
}

// Small dataset that trains in about a second.
inline Config small_config() {
  Config c;
  c.generator.videos_per_domain = 4;
  c.generator.frames_per_video = 24;
  c.generator.identities_per_video = 5;
  c.train.epochs = 3;
  c.train.lr_decay_epoch = 2;
  return c;
}

}  // namespace gps::testing
