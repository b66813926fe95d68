#include <gtest/gtest.h>

#include "gps/protomem.hpp"
#include "support.hpp"

namespace gps::mem {
namespace {

double cosine(const Vec& a, const Vec& b) { return a.dot(b) / (a.norm() * b.norm()); }

TEST(MomentumUpdate, FixedPointAndTwoStepExample) {
  Rng rng(2);
  const Vec x = gaussian_vec(rng, 6);
  EXPECT_LT((momentum_update(x, x, 0.9, false) - x).norm(), 1e-15);

  Vec c = Vec::Zero(1);
  const Vec one = Vec::Ones(1);
  c = momentum_update(c, one, 0.9, false);
  c = momentum_update(c, one, 0.9, false);
  EXPECT_NEAR(c[0], 0.19, 1e-15);
}

TEST(MomentumUpdate, RenormalisedIsUnitAndMismatchThrows) {
  Rng rng(3);
  const Vec c = gps::testing::unit_vec(rng, 5);
  const Vec x = gps::testing::unit_vec(rng, 5);
  EXPECT_NEAR(momentum_update(c, x, 0.9, true).norm(), 1.0, 1e-14);
  EXPECT_THROW(momentum_update(c, Vec::Zero(4), 0.9, false), ContractViolation);
}

TEST(ExpandSeries, SmallCases) {
  const std::vector<Vec> h1 = {(Vec(2) << 2.0, -1.0).finished()};
  EXPECT_LT((expand_series(h1, 0.9) - 0.1 * h1[0]).norm(), 1e-15);
  const std::vector<Vec> h2 = {Vec::Ones(2), Vec::Ones(2)};
  const Vec s = expand_series(h2, 0.9);
  EXPECT_NEAR(s[0], 0.19, 1e-15);
  EXPECT_NEAR(s[1], 0.19, 1e-15);
}

TEST(ExpandSeries, MatchesIteratedUpdates) {
  Rng rng(8);
  std::uniform_int_distribution<int> len(1, 50);
  std::uniform_real_distribution<double> mom(0.0, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    const double m = mom(rng);
    std::vector<Vec> h;
    Vec c = Vec::Zero(4);
    for (int i = 0; i < n; ++i) {
      h.push_back(gaussian_vec(rng, 4));
      c = momentum_update(c, h.back(), m, false);
    }
    EXPECT_LT((expand_series(h, m) - c).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(IdentityMemory, FirstSightingThenUnitNormUpdates) {
  IdentityMemory V({3, 9}, 4, 0.9);
  EXPECT_FALSE(V.initialized(3));
  Rng rng(4);
  V.update(3, 5.0 * gps::testing::unit_vec(rng, 4));
  EXPECT_TRUE(V.initialized(3));
  EXPECT_FALSE(V.initialized(9));
  for (int i = 0; i < 20; ++i) {
    V.update(3, gaussian_vec(rng, 4));
    EXPECT_NEAR(V.prototype(3).norm(), 1.0, 1e-14);
  }
  EXPECT_THROW(V.row_of(5), LookupError);
  EXPECT_THROW(V.update(5, Vec::Ones(4)), LookupError);
}

TEST(NegativeQueue, FifoOverwritesOldest) {
  NegativeQueue q(2, 1);
  EXPECT_EQ(q.entries().rows(), 0);
  for (double v : {1.0, 2.0, 3.0}) q.push(Vec::Constant(1, v));
  const Mat e = q.entries();
  ASSERT_EQ(e.rows(), 2);
  EXPECT_EQ(e(0, 0), 2.0);
  EXPECT_EQ(e(1, 0), 3.0);
}

TEST(NegativeQueue, CapacityPushesFillEverySlotOnce) {
  const int Q = 7;
  NegativeQueue q(Q, 1);
  std::vector<int> hits(Q, 0);
  for (int i = 0; i < Q; ++i) {
    const Eigen::Index slot = q.cursor();
    q.push(Vec::Constant(1, i + 1.0));
    ++hits[static_cast<std::size_t>(slot)];
  }
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_EQ(q.size(), Q);
  EXPECT_EQ(q.cursor(), 0);
  for (int i = 0; i < Q; ++i) EXPECT_EQ(q.slots()(i, 0), i + 1.0);
}

TEST(HalfPrototypes, OppositeHalfAndUnset) {
  const std::vector<int> labels = {1, 2};
  HalfPrototypes hp(labels, 0.9);
  const Vec a = Vec::Unit(3, 0), b = Vec::Unit(3, 1);
  hp.update(1, synth::Half::first, a);
  EXPECT_FALSE(hp.fetch_inter_frame_positive(1, synth::Half::first).has_value());
  hp.update(1, synth::Half::second, b);
  const auto pos = hp.fetch_inter_frame_positive(1, synth::Half::first);
  ASSERT_TRUE(pos.has_value());
  EXPECT_LT((*pos - b).norm(), 1e-15);
  EXPECT_LT((*hp.fetch_inter_frame_positive(1, synth::Half::second) - a).norm(), 1e-15);
  EXPECT_FALSE(hp.get(2, synth::Half::first).has_value());
  EXPECT_THROW(hp.fetch_inter_frame_positive(3, synth::Half::first), LookupError);
}

// Half prototypes follow the drift of their own half of the track.
TEST(HalfPrototypes, TrackTheirOwnHalf) {
  GeneratorConfig g;
  const int frames = 60;
  int wins = 0;
  double margin = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    Rng rng = keyed_rng(55, 1, static_cast<std::uint64_t>(t));
    const auto track = synth::appearance_track(g, rng, frames);
    const std::vector<int> labels = {0};
    HalfPrototypes hp(labels, 0.9);
    Vec mean_first = Vec::Zero(track[0].size()), mean_second = mean_first;
    for (int f = 0; f < frames; ++f) {
      const bool first = f < frames / 2;
      hp.update(0, first ? synth::Half::first : synth::Half::second, track[static_cast<std::size_t>(f)]);
      (first ? mean_first : mean_second) += track[static_cast<std::size_t>(f)];
    }
    const Vec c2 = *hp.get(0, synth::Half::second);
    const double d = cosine(c2, mean_second) - cosine(c2, mean_first);
    margin += d / trials;
    if (d > 0.0) ++wins;
  }
  EXPECT_GT(margin, 0.0);
  EXPECT_GE(wins, 45);
}

TEST(DomainPrototypes, RawMomentum) {
  DomainPrototypes d(2, 3, 0.9);
  d.update(1, Vec::Ones(3));
  d.update(1, Vec::Ones(3));
  EXPECT_NEAR(d.matrix()(1, 0), 0.19, 1e-15);
  EXPECT_EQ(d.matrix().row(0).norm(), 0.0);
  EXPECT_THROW(d.update(2, Vec::Ones(3)), LookupError);
}

}  // namespace
}  // namespace gps::mem
