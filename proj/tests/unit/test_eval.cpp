#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gps/eval.hpp"
#include "support.hpp"

namespace gps::eval {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

GalleryItem gal(const Vec& e, int id) {
  GalleryItem g;
  g.embedding = e;
  g.identity = id;
  return g;
}

// Rank by similarity (ties by index), then sum precision at each positive.
double brute_force_ap(const QueryItem& q, const std::vector<GalleryItem>& gallery) {
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const double s = q.embedding.dot(gallery[g].embedding) / (q.embedding.norm() * gallery[g].embedding.norm());
    ranked.emplace_back(-s, static_cast<int>(g));
  }
  std::sort(ranked.begin(), ranked.end());
  int positives = 0;
  for (const auto& g : gallery) positives += g.identity == q.identity;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (gallery[static_cast<std::size_t>(ranked[k].second)].identity != q.identity) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / positives;
}

TEST(Retrieval, PositiveAtRankOne) {
  const std::vector<QueryItem> q = {{v2(1, 0), 1, -1}};
  const std::vector<GalleryItem> g = {gal(v2(1, 0.1), 1), gal(v2(0, 1), 2), gal(v2(-1, 0), 3)};
  const RetrievalResult r = retrieval_metrics(q, g);
  EXPECT_EQ(r.mAP, 1.0);
  EXPECT_EQ(r.top1, 1.0);
}

TEST(Retrieval, PositiveAtRankTwo) {
  const std::vector<QueryItem> q = {{v2(1, 0), 1, -1}};
  const std::vector<GalleryItem> g = {gal(v2(1, 0.1), 2), gal(v2(1, 1), 1), gal(v2(-1, 0), 3)};
  const RetrievalResult r = retrieval_metrics(q, g);
  EXPECT_EQ(r.mAP, 0.5);
  EXPECT_EQ(r.top1, 0.0);
}

TEST(Retrieval, QueriesWithoutPositivesExcluded) {
  const std::vector<QueryItem> q = {{v2(1, 0), 1, -1}, {v2(0, 1), 9, -1}};
  const std::vector<GalleryItem> g = {gal(v2(1, 0), 1), gal(v2(0, 1), 2)};
  const RetrievalResult r = retrieval_metrics(q, g);
  EXPECT_EQ(r.excluded, std::vector<int>{1});
  EXPECT_EQ(r.evaluated, std::vector<int>{0});
  EXPECT_EQ(r.mAP, 1.0);
}

TEST(Retrieval, OwnDetectionLeavesGallery) {
  std::vector<GalleryItem> g = {gal(v2(1, 0), 1), gal(v2(0, 1), 1)};
  g[0].det_id = 0;
  g[1].det_id = 1;
  const std::vector<QueryItem> q = {{v2(1, 0), 1, 0}};
  const RetrievalResult r = retrieval_metrics(q, g);
  ASSERT_EQ(r.ap.size(), 1u);
  EXPECT_EQ(r.ap[0], 1.0);
  const std::vector<QueryItem> alone = {{v2(1, 0), 2, 0}};
  EXPECT_EQ(retrieval_metrics(alone, g).excluded.size(), 1u);
}

TEST(Retrieval, MatchesBruteForceOnTinyInstances) {
  Rng rng(80);
  std::uniform_int_distribution<int> size(1, 8), ident(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(rng);
    std::vector<GalleryItem> g;
    for (int i = 0; i < n; ++i) g.push_back(gal(gaussian_vec(rng, 3), ident(rng)));
    const QueryItem q{gaussian_vec(rng, 3), ident(rng), -1};
    const RetrievalResult r = retrieval_metrics(std::vector<QueryItem>{q}, g);
    const bool has_pos = std::any_of(g.begin(), g.end(), [&](const GalleryItem& x) { return x.identity == q.identity; });
    if (!has_pos) {
      EXPECT_EQ(r.excluded.size(), 1u);
      continue;
    }
    ASSERT_EQ(r.ap.size(), 1u);
    EXPECT_EQ(r.ap[0], brute_force_ap(q, g)) << "trial " << trial;
  }
}

TEST(Retrieval, InvariantToGalleryOrderAndScale) {
  Rng rng(81);
  std::vector<GalleryItem> g;
  for (int i = 0; i < 12; ++i) g.push_back(gal(gaussian_vec(rng, 4), i % 3));
  std::vector<QueryItem> q;
  for (int i = 0; i < 3; ++i) q.push_back({gaussian_vec(rng, 4), i, -1});
  const RetrievalResult a = retrieval_metrics(q, g);
  std::vector<GalleryItem> h = g;
  std::shuffle(h.begin(), h.end(), rng);
  for (auto& x : h) x.embedding *= 3.0;
  const RetrievalResult b = retrieval_metrics(q, h);
  ASSERT_EQ(a.ap.size(), b.ap.size());
  for (std::size_t i = 0; i < a.ap.size(); ++i) EXPECT_NEAR(a.ap[i], b.ap[i], 1e-12);
}

TEST(Detection, PerfectPredictions) {
  const std::vector<Box> gt = {{0, 0, 1, 2}, {3, 0, 1, 2}, {6, 1, 2, 2}};
  std::vector<Detection> pred;
  for (std::size_t i = 0; i < gt.size(); ++i) pred.push_back({gt[i], 0.1 * static_cast<double>(i)});
  const DetectionResult r = detection_metrics(pred, gt);
  EXPECT_EQ(r.ap, 1.0);
  EXPECT_EQ(r.recall, 1.0);
}

TEST(Detection, NoPredictions) {
  const std::vector<Box> gt = {{0, 0, 1, 1}};
  const DetectionResult r = detection_metrics(std::vector<Detection>{}, gt);
  EXPECT_EQ(r.ap, 0.0);
  EXPECT_EQ(r.recall, 0.0);
}

TEST(Detection, FalsePositiveOnTop) {
  const std::vector<Box> gt = {{0, 0, 1, 2}, {3, 0, 1, 2}};
  const std::vector<Detection> pred = {{{10, 10, 1, 1}, 0.9}, {gt[0], 0.8}, {gt[1], 0.7}};
  // PR points (r, p): (0, 0), (1/2, 1/2), (1, 2/3); interpolated precision
  // is 2/3 on both recall steps.
  const DetectionResult r = detection_metrics(pred, gt);
  EXPECT_NEAR(r.ap, 0.5 * (2.0 / 3.0) + 0.5 * (2.0 / 3.0), 1e-12);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.matched, 2);
}

TEST(Detection, DuplicateMatchCountsOnce) {
  const std::vector<Box> gt = {{0, 0, 1, 2}};
  const std::vector<Detection> pred = {{gt[0], 0.9}, {gt[0], 0.8}};
  const DetectionResult r = detection_metrics(pred, gt);
  EXPECT_EQ(r.matched, 1);
  EXPECT_EQ(r.ap, 1.0);
}

TEST(Detection, EmptyGroundTruthImageExcluded) {
  const std::vector<std::vector<Detection>> pred = {{{{0, 0, 1, 1}, 0.5}}, {}};
  const std::vector<std::vector<Box>> gt = {{}, {{0, 0, 1, 1}}};
  const DetectionResult r = detection_metrics(pred, gt);
  EXPECT_EQ(r.excluded_images, 1);
  EXPECT_EQ(r.num_gt, 1);
  EXPECT_EQ(r.recall, 0.0);
}

TEST(Detection, InvariantToMonotoneScoreMaps) {
  Rng rng(82);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Box> gt;
    std::vector<Detection> pred;
    for (int i = 0; i < 5; ++i) gt.push_back({u(rng), u(rng), 1, 2});
    for (int i = 0; i < 8; ++i) {
      Box b = i < 5 ? gt[static_cast<std::size_t>(i)] : Box{u(rng), u(rng), 1, 2};
      b.x += 0.1 * u(rng);
      pred.push_back({b, u(rng)});
    }
    std::vector<Detection> mapped = pred;
    for (auto& d : mapped) d.score = std::exp(d.score) + 3.0;
    std::vector<Detection> shuffled = pred;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double a = detection_metrics(pred, gt).ap;
    EXPECT_EQ(a, detection_metrics(mapped, gt).ap);
    EXPECT_EQ(a, detection_metrics(shuffled, gt).ap);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

}  // namespace
}  // namespace gps::eval
