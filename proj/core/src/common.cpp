#include "gps/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gps {

double iou(const Box& a, const Box& b) {
  const double ix0 = std::max(a.x, b.x);
  const double iy0 = std::max(a.y, b.y);
  const double ix1 = std::min(a.x + a.w, b.x + b.w);
  const double iy1 = std::min(a.y + a.h, b.y + b.h);
  const double iw = std::max(0.0, ix1 - ix0);
  const double ih = std::max(0.0, iy1 - iy0);
  const double inter = iw * ih;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Eigen::Vector4d encode_box(const Box& anchor, const Box& target) {
  const double acx = anchor.x + 0.5 * anchor.w;
  const double acy = anchor.y + 0.5 * anchor.h;
  const double tcx = target.x + 0.5 * target.w;
  const double tcy = target.y + 0.5 * target.h;
  return {(tcx - acx) / anchor.w, (tcy - acy) / anchor.h, std::log(target.w / anchor.w),
          std::log(target.h / anchor.h)};
}

Box decode_box(const Box& anchor, const Eigen::Vector4d& delta) {
  const double acx = anchor.x + 0.5 * anchor.w;
  const double acy = anchor.y + 0.5 * anchor.h;
  const double cx = acx + delta[0] * anchor.w;
  const double cy = acy + delta[1] * anchor.h;
  // Clamp the log-scale so a wild regressor cannot overflow.
  const double w = anchor.w * std::exp(std::clamp(delta[2], -4.0, 4.0));
  const double h = anchor.h * std::exp(std::clamp(delta[3], -4.0, 4.0));
  return {cx - 0.5 * w, cy - 0.5 * h, w, h};
}

Rng keyed_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Vec gaussian_vec(Rng& rng, Eigen::Index n, double stddev) {
  std::normal_distribution<double> nd(0.0, stddev);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace gps
