// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gps/dsbn.hpp"
#include "gps/eval.hpp"
#include "gps/idselect.hpp"
#include "gps/labelgen.hpp"
#include "gps/losses.hpp"
#include "gps/model.hpp"
#include "gps/protomem.hpp"
#include "gps/refine.hpp"
#include "gps/synthdata.hpp"
#include "gps/trainer.hpp"
#include "support.hpp"

namespace {

using namespace gps;
using gps::testing::gaussian_mat;
using gps::testing::numeric_grad;
using gps::testing::rel_err;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Mat unit_rows(Rng& rng, int n, int d) {
  Mat m = gaussian_mat(rng, n, d);
  m.rowwise().normalize();
  return m;
}

// ---- 1. gradients --------------------------------------------------------

struct GradCheck {
  std::string name;
  double worst = 0.0;
  int points = 0;
  void add(double e) {
    worst = std::max(worst, e);
    ++points;
  }
};

Outcome gradients() {
  constexpr int kPoints = 20;
  constexpr double kTol = 1e-4;
  Rng rng(1001);
  std::vector<GradCheck> checks;

  auto memory = [&](int L, int d) {
    std::vector<int> labels(static_cast<std::size_t>(L));
    std::iota(labels.begin(), labels.end(), 0);
    mem::IdentityMemory V(labels, d, 0.9);
    for (int l = 0; l < L; ++l) V.update(l, gaussian_vec(rng, d));
    return V;
  };

  {
    GradCheck c{"oim"};
    for (int p = 0; p < kPoints; ++p) {
      const auto V = memory(6, 8);
      const Mat U = unit_rows(rng, 4, 8);
      const Vec x = gps::testing::unit_vec(rng, 8);
      const auto o = loss::oim_loss(x, p % 6, V, U, 0.1);
      c.add(rel_err(o.gradient("x"), numeric_grad(x, [&](const Mat& v) { return loss::oim_loss(v, p % 6, V, U, 0.1).value; })));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"id"};
    for (int p = 0; p < kPoints; ++p) {
      const auto V = memory(5, 8);
      const Mat U = unit_rows(rng, 3, 8), C = unit_rows(rng, 3, 8);
      const Vec x = gps::testing::unit_vec(rng, 8);
      const auto o = loss::id_loss(x, p % 5, V, U, C, 0.1);
      c.add(rel_err(o.gradient("x"), numeric_grad(x, [&](const Mat& v) { return loss::id_loss(v, p % 5, V, U, C, 0.1).value; })));
      c.add(rel_err(o.gradient("intra"), numeric_grad(C, [&](const Mat& v) { return loss::id_loss(x, p % 5, V, U, v, 0.1).value; })));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"ie_triplet"};
    while (c.points < kPoints) {
      const Vec a = gps::testing::unit_vec(rng, 8);
      const Mat P = unit_rows(rng, 2, 8), N = unit_rows(rng, 3, 8);
      const auto o = loss::ie_triplet_loss(a, P, N, 0.3);
      if (o.value < 1e-3) continue;  // inactive hinge has no gradient to check
      c.add(rel_err(o.gradient("anchor"), numeric_grad(a, [&](const Mat& v) { return loss::ie_triplet_loss(v, P, N, 0.3).value; })));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"cosine_decorr"};
    for (int p = 0; p < kPoints; ++p) {
      const Vec a = gaussian_vec(rng, 12), b = gaussian_vec(rng, 12);
      const auto o = loss::cosine_decorr(a, b);
      c.add(rel_err(o.gradient("z_id"), numeric_grad(a, [&](const Mat& v) { return loss::cosine_decorr(v, b).value; })));
      c.add(rel_err(o.gradient("z_ds"), numeric_grad(b, [&](const Mat& v) { return loss::cosine_decorr(a, v).value; })));
    }
    checks.push_back(c);
  }
  for (KernelKind kind : {KernelKind::linear, KernelKind::gaussian_rbf}) {
    GradCheck c{kind == KernelKind::linear ? "hsic_linear" : "hsic_rbf"};
    KernelSpec k;
    k.kind = kind;
    for (int p = 0; p < kPoints; ++p) {
      const Mat a = gaussian_mat(rng, 10, 2), b = gaussian_mat(rng, 10, 1);
      // Fixed bandwidth: the median heuristic is held constant in the
      // analytic gradient.
      k.bandwidth = kind == KernelKind::linear ? 0.0 : loss::median_bandwidth(a);
      const auto o = loss::hsic_fnorm(a, b, k);
      c.add(rel_err(o.gradient("z_id"), numeric_grad(a, [&](const Mat& v) { return loss::hsic_fnorm(v, b, k).value; })));
      c.add(rel_err(o.gradient("z_ds"), numeric_grad(b, [&](const Mat& v) { return loss::hsic_fnorm(a, v, k).value; })));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"weighted_det_loss"};
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int p = 0; p < kPoints; ++p) {
      Vec s(5), y(5), w(5);
      for (int i = 0; i < 5; ++i) {
        s[i] = u(rng);
        y[i] = u(rng) < 0.5 ? 1.0 : 0.0;
        w[i] = u(rng);
      }
      const Mat rp = gaussian_mat(rng, 5, 4, 0.4), rt = gaussian_mat(rng, 5, 4, 0.4);
      const auto o = refine::weighted_det_loss(s, y, rp, rt, w);
      c.add(rel_err(o.grad_scores, numeric_grad(s, [&](const Mat& v) { return refine::weighted_det_loss(v, y, rp, rt, w).value; })));
      c.add(rel_err(o.grad_reg, numeric_grad(rp, [&](const Mat& v) { return refine::weighted_det_loss(s, y, v, rt, w).value; })));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"embed_chain"};
    for (int p = 0; p < kPoints; ++p) {
      model::Model m = model::init_model(10, 6, {0, 1}, true, true, DsbnConfig{}, 100 + static_cast<std::uint64_t>(p));
      m.reid.branch(p % 2).gamma = Vec::Ones(6) + 0.2 * gaussian_vec(rng, 6);
      m.reid.branch(p % 2).beta = 0.1 * gaussian_vec(rng, 6);
      const Mat raw = gaussian_mat(rng, 8, 10);
      const Mat w = gaussian_mat(rng, 8, 6);
      model::EmbedCache cache;
      model::embed_batch(m, raw, p % 2, &cache);
      model::ModelGrads g = model::ModelGrads::zeros(m);
      model::embed_backward(m, cache, w, g);
      const Mat W0 = m.W;
      const Mat num = numeric_grad(W0, [&](const Mat& v) {
        model::Model mm = m;
        mm.W = v;
        return model::embed_batch(mm, raw, p % 2, nullptr).cwiseProduct(w).sum();
      });
      c.add(rel_err(g.W, num));
    }
    checks.push_back(c);
  }
  {
    GradCheck c{"dsbn_forward_train"};
    for (int p = 0; p < kPoints; ++p) {
      dsbn::Dsbn bn(2, 5, 5, 1e-5, 0.9, 1.0);
      bn.branch(1).gamma = Vec::Ones(5) + 0.3 * gaussian_vec(rng, 5);
      bn.branch(1).beta = 0.2 * gaussian_vec(rng, 5);
      const Mat x = gaussian_mat(rng, 9, 5), w = gaussian_mat(rng, 9, 5);
      dsbn::TrainCache cache;
      dsbn::Dsbn live = bn;
      live.forward_train(x, 1, x, &cache);
      const dsbn::Grads g = live.backward(cache, w);
      auto f = [&](const Mat& v) {
        dsbn::Dsbn t = bn;
        return t.forward_train(v, 1, v, nullptr).cwiseProduct(w).sum();
      };
      c.add(rel_err(g.dx, numeric_grad(x, f)));
      const Mat ng = numeric_grad(bn.branch(1).gamma, [&](const Mat& v) {
        dsbn::Dsbn t = bn;
        t.branch(1).gamma = v;
        return t.forward_train(x, 1, x, nullptr).cwiseProduct(w).sum();
      });
      c.add(rel_err(g.dgamma, ng));
    }
    checks.push_back(c);
  }

  Outcome out{true, ""};
  std::ostringstream d;
  for (const auto& c : checks) {
    const bool ok = c.worst < kTol && c.points >= kPoints;
    out.pass = out.pass && ok;
    d << c.name << "=" << fmt("%.1e", c.worst) << (ok ? "" : "!") << " ";
  }
  out.detail = "max rel err " + d.str();
  return out;
}

// ---- 2. Hungarian ------------------------------------------------------

double brute_force_max(const Mat& H) {
  std::vector<int> perm(static_cast<std::size_t>(H.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1e300;
  do {
    double s = 0.0;
    for (std::size_t r = 0; r < perm.size(); ++r) s += H(static_cast<Eigen::Index>(r), perm[r]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome hungarian() {
  Rng rng(1002);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exact = 0, valid = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = size(rng);
    Mat H(n, n);
    for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = u(rng) < 0.25 ? 0.0 : u(rng);
    const auto A = labelgen::hungarian_max(H);
    const Eigen::MatrixXi M = A.matrix();
    valid += (M.rowwise().sum().array() <= 1).all() && (M.colwise().sum().array() <= 1).all();
    exact += A.objective(H) == brute_force_max(H);
  }
  return {exact == 200 && valid == 200, std::to_string(exact) + "/200 exact optima"};
}

// ---- 3. HSIC calibration -----------------------------------------------

// Centred RBF Gram matrix with the median-heuristic bandwidth.
Mat centred_gram(const Mat& z) {
  const double s = loss::median_bandwidth(z);
  const Eigen::Index n = z.rows();
  Mat K(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) K(a, b) = std::exp(-(z.row(a) - z.row(b)).squaredNorm() / (2 * s * s));
  const Vec rm = K.rowwise().mean();
  const double all = rm.mean();
  K.colwise() -= rm;
  K.rowwise() -= rm.transpose();
  K.array() += all;
  return K;
}

// 95th percentile of the statistic with z_ds's rows permuted.
double null_q95(const Mat& Fc, const Mat& Gc, Rng& rng, int perms) {
  const Eigen::Index n = Fc.rows();
  std::vector<Eigen::Index> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<double> stats;
  for (int p = 0; p < perms; ++p) {
    std::shuffle(pi.begin(), pi.end(), rng);
    double s = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const Eigen::Index pb = pi[static_cast<std::size_t>(b)];
      for (Eigen::Index a = 0; a < n; ++a) s += Fc(a, b) * Gc(pi[static_cast<std::size_t>(a)], pb);
    }
    stats.push_back(s / static_cast<double>((n - 1) * (n - 1)));
  }
  std::sort(stats.begin(), stats.end());
  return stats[static_cast<std::size_t>(std::ceil(0.95 * perms)) - 1];
}

Outcome hsic_calibration() {
  Rng rng(1003);
  const int n = 1000, trials = 50, perms = 40;
  KernelSpec rbf;
  int below = 0;
  double worst_agree = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Mat x = gaussian_mat(rng, n, 1), y = gaussian_mat(rng, n, 1);
    const double stat = loss::hsic_fnorm(x, y, rbf).value;
    const Mat Fc = centred_gram(x), Gc = centred_gram(y);
    const double oracle = Fc.cwiseProduct(Gc).sum() / static_cast<double>((n - 1) * (n - 1));
    worst_agree = std::max(worst_agree, std::abs(stat - oracle) / std::max(oracle, 1e-300));
    below += stat < null_q95(Fc, Gc, rng, perms);
  }
  const Mat x = gaussian_mat(rng, n, 1);
  const Mat y = x.array().square().matrix();
  const double dep = loss::hsic_fnorm(x, y, rbf).value;
  const double q95 = null_q95(centred_gram(x), centred_gram(y), rng, perms);

  const Mat a = gaussian_mat(rng, 500, 1), b = gaussian_mat(rng, 500, 1);
  KernelSpec rff;
  rff.kind = KernelKind::random_features;
  rff.num_random_features = 2048;
  const double approx = loss::hsic_random_features(a, b, rff, false).value;
  const double exact = loss::hsic_fnorm(a, b, rbf).value;
  const double rff_err = std::abs(approx - exact) / exact;

  const bool pass = below >= 45 && dep > 10.0 * q95 && rff_err < 0.1 && worst_agree < 1e-9;
  std::ostringstream d;
  d << "independent below q95 " << below << "/" << trials << ", X^2 stat/q95 " << fmt("%.1f", dep / q95)
    << ", rff rel err " << fmt("%.3f", rff_err) << ", oracle agreement " << fmt("%.1e", worst_agree);
  return {pass, d.str()};
}

// ---- 4. prototype series -----------------------------------------------

Outcome series_identity() {
  Rng rng(1004);
  std::uniform_int_distribution<int> len(1, 50);
  std::uniform_real_distribution<double> mom(0.0, 0.99);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = len(rng);
    const double m = mom(rng);
    std::vector<Vec> h;
    Vec c = Vec::Zero(8);
    for (int i = 0; i < n; ++i) {
      h.push_back(gaussian_vec(rng, 8));
      c = mem::momentum_update(c, h.back(), m, false);
    }
    worst = std::max(worst, (mem::expand_series(h, m) - c).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "max abs diff " + fmt("%.1e", worst) + " over 100 histories"};
}

// ---- 5. pseudo-label quality -------------------------------------------

Outcome pseudo_labels() {
  Config c;
  const synth::Dataset ds = synth::corrupt(synth::generate_dataset(c.generator), c.generator);
  auto [tr, ho] = synth::split(ds, c.holdout_domain());
  train::Trainer t(c, tr);
  constexpr int kEpochs = 5;
  double worst = 1.0;
  int dups = 0, pseudo = 0;
  std::ostringstream per;
  for (int e = 0; e < kEpochs; ++e) {
    t.train_epoch(e);
    if (e == 0) continue;  // labels are generated from the second epoch on
    const auto q = train::label_quality(t.frames());
    worst = std::min(worst, q.precision());
    dups += q.duplicate_frames;
    pseudo = q.pseudo;
    per << " " << fmt("%.4f", q.precision());
  }
  std::ostringstream d;
  d << "precision per regeneration" << per.str() << ", " << pseudo << " pseudo labels, " << dups
    << " duplicate frames";
  return {worst >= 0.95 && dups == 0 && pseudo > 0, d.str()};
}

// ---- 6. ablation -------------------------------------------------------

Outcome ablation() {
  Config c;
  const synth::Dataset ds = synth::corrupt(synth::generate_dataset(c.generator), c.generator);
  auto [tr, ho] = synth::split(ds, c.holdout_domain());
  const auto rows = train::ablation_rows();
  const std::vector<std::uint64_t> seeds = {c.train.seed, c.train.seed + 1, c.train.seed + 2};
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto t0 = Clock::now();
  const auto res = train::run_ablation(c, tr, ho, rows, seeds, jobs);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  std::vector<double> mean(rows.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t s = 0; s < seeds.size(); ++s) mean[i] += res[i * seeds.size() + s].metrics.reid.mAP;
    mean[i] /= static_cast<double>(seeds.size());
  }
  std::ostringstream table;
  for (std::size_t i = 0; i < rows.size(); ++i) table << "    " << rows[i].name << " " << fmt("%.4f", mean[i]) << "\n";
  std::cout << table.str();

  // Cumulative chain: baseline, +mDSBN, +BR, +MLG, +FD, +IE, +ID.
  const std::vector<std::size_t> chain = {0, 1, 3, 4, 6, 7, 9};
  bool monotone = true;
  std::ostringstream d;
  d << "full-baseline " << fmt("%+.2f", 100 * (mean.back() - mean.front())) << " pts; chain deltas";
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const double delta = mean[chain[k]] - mean[chain[k - 1]];
    monotone = monotone && delta >= 0.0;
    d << " " << fmt("%+.2f", 100 * delta);
  }
  d << "; grid " << fmt("%.0f", secs) << " s on " << jobs << " jobs";
  const bool pass = mean.back() - mean.front() >= 0.05 && monotone && secs < 1800.0;
  return {pass, d.str()};
}

// ---- 7. metric oracles -------------------------------------------------

double oracle_ap(const eval::QueryItem& q, const std::vector<eval::GalleryItem>& g) {
  std::vector<std::pair<double, int>> r;
  for (std::size_t i = 0; i < g.size(); ++i)
    r.emplace_back(-q.embedding.dot(g[i].embedding) / (q.embedding.norm() * g[i].embedding.norm()), static_cast<int>(i));
  std::sort(r.begin(), r.end());
  int pos = 0, hits = 0;
  for (const auto& x : g) pos += x.identity == q.identity;
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (g[static_cast<std::size_t>(r[k].second)].identity == q.identity) s += static_cast<double>(++hits) / static_cast<double>(k + 1);
  return s / pos;
}

// Greedy matching by score, then AP as the sum over true positives of the
// best precision at any later rank, divided by the number of gt boxes.
double oracle_det_ap(const std::vector<eval::Detection>& pred, const std::vector<Box>& gt, double thr) {
  std::vector<int> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pred[static_cast<std::size_t>(a)].score > pred[static_cast<std::size_t>(b)].score; });
  std::vector<bool> used(gt.size(), false);
  std::vector<int> tp;
  for (int i : order) {
    int best = -1;
    double bo = 0.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (used[g]) continue;
      const double o = iou(pred[static_cast<std::size_t>(i)].box, gt[g]);
      if (o >= thr && o > bo) best = static_cast<int>(g), bo = o;
    }
    if (best >= 0) used[static_cast<std::size_t>(best)] = true;
    tp.push_back(best >= 0);
  }
  if (gt.empty()) return 0.0;
  double ap = 0.0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    if (!tp[k]) continue;
    double best_prec = 0.0;
    int cum = 0;
    for (std::size_t j = 0; j < tp.size(); ++j) {
      cum += tp[j];
      if (j >= k) best_prec = std::max(best_prec, static_cast<double>(cum) / static_cast<double>(j + 1));
    }
    ap += best_prec;
  }
  return ap / static_cast<double>(gt.size());
}

Outcome metric_oracles() {
  Rng rng(1007);
  std::uniform_int_distribution<int> size(1, 8), ident(0, 2);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  int ret_ok = 0, ret_n = 0, det_ok = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<eval::GalleryItem> g;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      eval::GalleryItem item;
      item.embedding = gaussian_vec(rng, 3);
      item.identity = ident(rng);
      g.push_back(item);
    }
    const eval::QueryItem q{gaussian_vec(rng, 3), ident(rng), -1};
    const auto r = eval::retrieval_metrics(std::vector<eval::QueryItem>{q}, g);
    if (!r.ap.empty()) {
      ++ret_n;
      ret_ok += r.ap[0] == oracle_ap(q, g);
    } else {
      ++ret_n;
      ret_ok += std::none_of(g.begin(), g.end(), [&](const eval::GalleryItem& x) { return x.identity == q.identity; });
    }

    std::vector<Box> gt;
    std::vector<eval::Detection> pred;
    const int ng = size(rng) - 1, np = size(rng);
    for (int i = 0; i < ng; ++i) gt.push_back({u(rng), u(rng), 1.0, 2.0});
    for (int i = 0; i < np; ++i) {
      Box b = (i < ng && u(rng) < 3.0) ? gt[static_cast<std::size_t>(i)] : Box{u(rng), u(rng), 1.0, 2.0};
      b.x += 0.1 * u(rng);
      pred.push_back({b, u(rng)});
    }
    const auto d = eval::detection_metrics(pred, gt, 0.5);
    det_ok += std::abs(d.ap - oracle_det_ap(pred, gt, 0.5)) <= 1e-12;
  }
  std::ostringstream s;
  s << "retrieval " << ret_ok << "/" << ret_n << " exact, detection " << det_ok << "/500 within 1e-12";
  return {ret_ok == ret_n && det_ok == 500, s.str()};
}

// ---- 8. DSBN collapse --------------------------------------------------

Outcome dsbn_collapse() {
  Rng rng(1008);
  bool bitwise = true;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    dsbn::Dsbn one(1, 6, 4, 1e-5, 0.9, 1.0);
    one.branch(0).gamma = Vec::Ones(6) + 0.3 * gaussian_vec(rng, 6);
    one.branch(0).beta = 0.2 * gaussian_vec(rng, 6);
    one.forward_train(gaussian_mat(rng, 12, 6, 2.0), 0, gaussian_mat(rng, 12, 4), nullptr);
    const Mat q = gaussian_mat(rng, 7, 6);
    const dsbn::Branch& b = one.branch(0);
    Mat ref(q.rows(), q.cols());
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      for (Eigen::Index c = 0; c < q.cols(); ++c)
        ref(r, c) = b.gamma[c] * ((q(r, c) - b.running_mean[c]) / std::sqrt(b.running_var[c] + one.eps())) + b.beta[c];
    bitwise = bitwise && one.infer_mixture(q, gaussian_mat(rng, 7, 4)) == ref;

    dsbn::Dsbn many(4, 6, 4, 1e-5, 0.9, 0.7);
    const Mat x = gaussian_mat(rng, 12, 6, 1.5);
    const Vec g = Vec::Ones(6) + 0.3 * gaussian_vec(rng, 6), be = 0.2 * gaussian_vec(rng, 6);
    for (int i = 0; i < 4; ++i) {
      many.branch(i).gamma = g;
      many.branch(i).beta = be;
      many.forward_train(x, i, gaussian_mat(rng, 12, 4), nullptr);
    }
    const Mat mix = many.infer_mixture(q, gaussian_mat(rng, 7, 4));
    for (int i = 0; i < 4; ++i) worst = std::max(worst, (mix - many.infer_branch(q, i)).cwiseAbs().maxCoeff());
  }
  return {bitwise && worst <= 1e-10,
          std::string("K=1 bitwise ") + (bitwise ? "yes" : "no") + ", identical branches max diff " + fmt("%.1e", worst)};
}

// ---- 9. mask selection -------------------------------------------------

Outcome mask_selection() {
  IdselectConfig cfg;
  cfg.probe_iters = 2000;
  int subset = 0, sound = 0, checks = 0;
  for (int t = 0; t < 20; ++t) {
    Rng rng = keyed_rng(1009, 0, static_cast<std::uint64_t>(t));
    const auto p = gps::testing::planted_probe(rng, 10, 5, 16, 8);
    const auto clf = idselect::train_probe(p.X, p.labels, cfg, static_cast<std::uint64_t>(t));
    const auto m = idselect::select_mask(p.X, p.labels, clf, cfg.t);
    const auto kept = m.kept();
    subset += std::all_of(kept.begin(), kept.end(), [](int k) { return k < 8; });
    for (double budget : {0.0, cfg.t, 0.1, 0.3}) {
      if (budget >= clf.accuracy(p.X, p.labels)) continue;
      const auto mm = idselect::select_mask(p.X, p.labels, clf, budget);
      ++checks;
      sound += clf.accuracy(idselect::apply_mask(p.X, mm.alpha), p.labels) >= mm.baseline_metric - budget;
    }
  }
  std::ostringstream d;
  d << "subset of signal dims " << subset << "/20, constraint held " << sound << "/" << checks;
  return {subset >= 19 && sound == checks, d.str()};
}

}  // namespace

// Optional arguments select criteria by number, e.g. `gps_acceptance 3 5`.
int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> all = {
      {1, "gradient suite", gradients, 30},
      {2, "hungarian optimality", hungarian, 5},
      {3, "hsic calibration", hsic_calibration, 60},
      {4, "prototype series identity", series_identity, 1},
      {5, "pseudo-label quality", pseudo_labels, 10},
      {6, "directional ablation", ablation, 1800},
      {7, "metric oracle equivalence", metric_oracles, 5},
      {8, "dsbn collapse", dsbn_collapse, 5},
      {9, "mask-selection soundness", mask_selection, 60},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (pass ? "PASS" : "FAIL") << " - " << o.detail
              << " [" << fmt("%.2f", secs) << " s" << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
