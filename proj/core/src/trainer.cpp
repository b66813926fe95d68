#include "gps/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <mutex>
#include <thread>

#include "gps/refine.hpp"

namespace gps::train {

namespace {

constexpr std::uint64_t kTagShuffle = 0x7368756666;
constexpr std::uint64_t kTagPairs = 0x7061697273;
constexpr std::uint64_t kTagProbe = 0x70726f6265;
constexpr double kIntraOverlap = 0.5;

Mat stack_features(const std::vector<const Vec*>& rows, Eigen::Index dim) {
  Mat R(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) R.row(static_cast<Eigen::Index>(i)) = rows[i]->transpose();
  return R;
}

void check_finite(double v, const char* component) {
  if (!std::isfinite(v)) throw Error(std::string("trainer: non-finite loss in component '") + component + "'");
}

}  // namespace

std::vector<FrameData> prepare_frames(const synth::Dataset& train, const Config& cfg) {
  const bool br = cfg.train.toggles.br;
  std::vector<FrameData> out;
  out.reserve(train.frames.size());
  for (const synth::Frame& f : train.frames) {
    FrameData fd;
    fd.frame_id = f.frame_id;
    fd.video_id = f.video_id;
    fd.domain_id = f.domain_id;
    fd.half = f.half;
    if (br) {
      const auto merged = refine::merge_sources(f.boxes, f.auxiliary, cfg.refine);
      fd.base = refine::hard_filter(merged, cfg.refine);
    } else {
      fd.base = f.boxes;
    }
    fd.working = fd.base;

    const auto np = static_cast<Eigen::Index>(f.proposals.size());
    const Eigen::Index dim = cfg.generator.raw_dim;
    fd.proposal_raw.resize(np, dim);
    fd.det_cls = Vec::Zero(np);
    fd.det_reg = Mat::Zero(np, 4);
    fd.det_weight = Vec::Ones(np);
    for (Eigen::Index i = 0; i < np; ++i) {
      const synth::Proposal& p = f.proposals[static_cast<std::size_t>(i)];
      if (p.feature.size() != dim) throw ConfigError("trainer: proposal feature dimension differs from generator.raw_dim");
      fd.proposal_raw.row(i) = p.feature.transpose();
      fd.proposal_box.push_back(p.box);
      int best = -1;
      double best_iou = 0.5;
      for (std::size_t a = 0; a < fd.base.size(); ++a) {
        const double o = iou(p.box, fd.base[a].box);
        if (o >= best_iou) {
          best = static_cast<int>(a);
          best_iou = o;
        }
      }
      if (best < 0) continue;
      const synth::BoxAnn& ann = fd.base[static_cast<std::size_t>(best)];
      fd.det_cls[i] = 1.0;
      fd.det_reg.row(i) = encode_box(p.box, ann.box).transpose();
      fd.det_weight[i] = br ? ann.confidence : 1.0;
    }
    out.push_back(std::move(fd));
  }
  return out;
}

struct Trainer::Forward {
  Mat raw;
  Mat x;
  model::EmbedCache cache;
  std::vector<const synth::BoxAnn*> boxes;
  std::vector<synth::Half> halves;
  std::vector<int> frame_of;  // batch-local frame number per row
  Mat det_raw;
};

Trainer::Trainer(const Config& cfg, const synth::Dataset& train) : cfg_(cfg) {
  cfg_.validate();
  const auto domains = train.domains();
  if (domains.empty()) throw ConfigError("trainer: training set is empty");
  frames_ = prepare_frames(train, cfg_);

  std::set<int> labels;
  for (const auto& f : frames_)
    for (const auto& b : f.base)
      if (b.identity) {
        labels.insert(*b.identity);
        auto& ids = video_identities_[f.video_id];
        if (std::find(ids.begin(), ids.end(), *b.identity) == ids.end()) ids.push_back(*b.identity);
      }
  for (auto& [v, ids] : video_identities_) std::sort(ids.begin(), ids.end());
  const std::vector<int> label_vec(labels.begin(), labels.end());

  const auto& t = cfg_.train;
  const bool multi = t.toggles.mdsbn;
  model_ = model::init_model(cfg_.generator.raw_dim, t.embed_dim, domains, multi && cfg_.dsbn.reid_head,
                             multi && cfg_.dsbn.det_head, cfg_.dsbn, t.seed);
  V_ = mem::IdentityMemory(label_vec, t.embed_dim, t.memory_momentum);
  U_ = mem::NegativeQueue(t.queue_size, t.embed_dim);
  halves_ = mem::HalfPrototypes(label_vec, t.memory_momentum);
  rng_ = keyed_rng(t.seed, kTagShuffle);
  init_running_stats();
  sgd_ = model::Sgd(model_, t.sgd_momentum, t.weight_decay);
}

// Running statistics and domain prototypes are seeded from one pass over the
// training data so that the untrained model can already be evaluated.
void Trainer::init_running_stats() {
  auto seed_head = [&](dsbn::Dsbn& head, bool reid) {
    for (Eigen::Index br = 0; br < head.branches(); ++br) {
      std::vector<const FrameData*> members;
      Eigen::Index total = 0;
      for (const auto& f : frames_) {
        if (model_.branch_for(head, f.domain_id) != br) continue;
        members.push_back(&f);
        total += reid ? static_cast<Eigen::Index>(f.working.size()) : f.proposal_raw.rows();
      }
      if (total < 2) continue;
      Mat raw(total, model_.raw_dim());
      Eigen::Index r = 0;
      for (const FrameData* f : members) {
        if (reid) {
          for (const auto& b : f->working) raw.row(r++) = b.feature.transpose();
        } else {
          raw.middleRows(r, f->proposal_raw.rows()) = f->proposal_raw;
          r += f->proposal_raw.rows();
        }
      }
      const Mat x = reid ? Mat(raw * model_.W) : raw;
      dsbn::Branch& b = head.branch(br);
      b.running_mean = x.colwise().mean().transpose();
      b.running_var = (x.rowwise() - b.running_mean.transpose()).array().square().colwise().sum().transpose() /
                      static_cast<double>(x.rows() - 1);
      b.populated = true;
      head.prototypes().matrix().row(br) = raw.colwise().mean();
    }
  };
  seed_head(model_.reid, true);
  seed_head(model_.det, false);
}

double Trainer::lr_at(int epoch) const {
  const auto& t = cfg_.train;
  return epoch >= t.lr_decay_epoch ? t.lr * t.lr_decay_factor : t.lr;
}

std::vector<Batch> Trainer::make_batches(Rng& rng) const {
  std::vector<std::size_t> order(frames_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const bool by_domain = model_.reid.branches() > 1 || model_.det.branches() > 1;
  std::map<int, Batch> pending;
  std::map<int, int> pending_n;
  std::map<int, std::size_t> last_emitted;
  std::vector<Batch> out;
  for (std::size_t fi : order) {
    const int key = by_domain ? frames_[fi].domain_id : 0;
    Batch& b = pending[key];
    if (b.frames.empty()) b.domain = frames_[fi].domain_id;
    b.frames.push_back(fi);
    pending_n[key] += static_cast<int>(frames_[fi].working.size());
    if (pending_n[key] >= cfg_.train.batch_size) {
      last_emitted[key] = out.size();
      out.push_back(std::move(b));
      pending.erase(key);
      pending_n[key] = 0;
    }
  }
  // Leftovers join the key's last batch unless they are big enough alone.
  for (auto& [key, b] : pending) {
    if (b.frames.empty()) continue;
    const auto it = last_emitted.find(key);
    if (pending_n[key] >= 2 || it == last_emitted.end()) {
      out.push_back(std::move(b));
    } else {
      auto& dst = out[it->second].frames;
      dst.insert(dst.end(), b.frames.begin(), b.frames.end());
    }
  }
  return out;
}

std::vector<std::pair<int, int>> Trainer::sample_pairs(Rng& rng) const {
  std::vector<std::pair<int, int>> pairs;
  if (!cfg_.train.toggles.fd || !mask_) return pairs;
  const auto kept = mask_->kept();
  const auto dropped = mask_->dropped();
  if (kept.empty() || dropped.empty()) return pairs;
  std::vector<std::pair<int, int>> all;
  for (int i : kept)
    for (int j : dropped) all.emplace_back(i, j);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg_.loss.decorr_pairs), all.size());
  pairs.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

LossBreakdown Trainer::run_batch(const Batch& b, const std::vector<std::pair<int, int>>& pairs,
                                 model::ModelGrads* grads, Forward* fwd) const {
  const auto& tg = cfg_.train.toggles;
  const auto& lc = cfg_.loss;
  Forward local;
  Forward& F = fwd ? *fwd : local;
  F = Forward{};

  std::vector<const Vec*> rows;
  std::vector<Eigen::Index> frame_start;
  for (std::size_t k = 0; k < b.frames.size(); ++k) {
    const FrameData& fd = frames_[b.frames[k]];
    frame_start.push_back(static_cast<Eigen::Index>(rows.size()));
    for (const auto& box : fd.working) {
      rows.push_back(&box.feature);
      F.boxes.push_back(&box);
      F.halves.push_back(fd.half);
      F.frame_of.push_back(static_cast<int>(k));
    }
  }
  frame_start.push_back(static_cast<Eigen::Index>(rows.size()));
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = model_.embed_dim();

  LossBreakdown lb;
  Mat dx = Mat::Zero(n, d);
  if (n >= 2) {
    F.raw = stack_features(rows, model_.raw_dim());
    F.x = model::embed_batch(model_, F.raw, b.domain, &F.cache);
    const Mat Ue = U_.entries();

    int n_id = 0, n_ie = 0;
    double id_sum = 0.0, ie_sum = 0.0;
    std::vector<Eigen::Index> id_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      const synth::BoxAnn& box = *F.boxes[static_cast<std::size_t>(i)];
      if (!box.identity || !V_.contains(*box.identity) || !V_.initialized(*box.identity)) continue;
      id_rows.push_back(i);
    }
    const double id_w = id_rows.empty() ? 0.0 : 1.0 / static_cast<double>(id_rows.size());
    // Hinge terms are averaged over the anchors that produced one.
    std::vector<std::pair<Eigen::Index, Vec>> ie_grads;
    for (Eigen::Index i : id_rows) {
      const synth::BoxAnn& box = *F.boxes[static_cast<std::size_t>(i)];
      const int label = *box.identity;
      const Vec xi = F.x.row(i).transpose();
      if (tg.id) {
        const int fk = F.frame_of[static_cast<std::size_t>(i)];
        const Eigen::Index s = frame_start[static_cast<std::size_t>(fk)];
        const Eigen::Index e = frame_start[static_cast<std::size_t>(fk) + 1];
        // A heavily overlapping box in the same frame is most likely this
        // person again (an unmerged duplicate), not a distinct negative.
        std::vector<Eigen::Index> others;
        for (Eigen::Index j = s; j < e; ++j)
          if (j != i && iou(box.box, F.boxes[static_cast<std::size_t>(j)]->box) < kIntraOverlap) others.push_back(j);
        Mat intra(static_cast<Eigen::Index>(others.size()), d);
        for (std::size_t k = 0; k < others.size(); ++k) intra.row(static_cast<Eigen::Index>(k)) = F.x.row(others[k]);
        const loss::LossOutput o = loss::id_loss(xi, label, V_, Ue, intra, lc.tau);
        id_sum += o.value;
        dx.row(i) += id_w * o.gradient("x").transpose();
        const Mat& gi = o.gradient("intra");
        for (std::size_t k = 0; k < others.size(); ++k) dx.row(others[k]) += id_w * gi.row(static_cast<Eigen::Index>(k));
      } else {
        const loss::LossOutput o = loss::oim_loss(xi, label, V_, Ue, lc.tau);
        id_sum += o.value;
        dx.row(i) += id_w * o.gradient("x").transpose();
      }
      ++n_id;

      if (tg.ie) {
        const auto pos = halves_.fetch_inter_frame_positive(label, F.halves[static_cast<std::size_t>(i)]);
        const auto vit = video_identities_.find(box.video_id);
        if (!pos || vit == video_identities_.end()) continue;
        std::vector<const int*> negs;
        for (const int& other : vit->second)
          if (other != label && V_.initialized(other)) negs.push_back(&other);
        if (negs.empty()) continue;
        Mat N(static_cast<Eigen::Index>(negs.size()), d);
        for (std::size_t k = 0; k < negs.size(); ++k) N.row(static_cast<Eigen::Index>(k)) = V_.prototype(*negs[k]).transpose();
        const loss::LossOutput o = loss::ie_triplet_loss(xi, pos->transpose(), N, lc.margin);
        if (o.skipped) continue;
        ie_sum += o.value;
        ++n_ie;
        ie_grads.emplace_back(i, o.gradient("anchor").col(0));
      }
    }
    if (n_id > 0) lb.id = id_sum / n_id;
    if (n_ie > 0) {
      lb.ie = ie_sum / n_ie;
      for (const auto& [i, g] : ie_grads) dx.row(i) += (lc.lambda_ie / n_ie) * g.transpose();
    }
    if (tg.fd && !pairs.empty()) {
      const loss::LossOutput o = loss::feature_decorrelation(F.x, pairs, lc.kernel);
      if (!o.skipped) {
        lb.cov = o.value;
        dx += lc.lambda_cov * o.gradient("x");
      }
    }
    if (grads) model::embed_backward(model_, F.cache, dx, *grads);
  }

  // Detection stand-in on every proposal of the batch's frames.
  Eigen::Index np = 0;
  for (std::size_t fi : b.frames) np += frames_[fi].proposal_raw.rows();
  if (np >= 2) {
    F.det_raw.resize(np, model_.raw_dim());
    Vec cls(np), w(np);
    Mat reg_t(np, 4);
    Eigen::Index r = 0;
    for (std::size_t fi : b.frames) {
      const FrameData& fd = frames_[fi];
      const Eigen::Index m = fd.proposal_raw.rows();
      F.det_raw.middleRows(r, m) = fd.proposal_raw;
      cls.segment(r, m) = fd.det_cls;
      w.segment(r, m) = fd.det_weight;
      reg_t.middleRows(r, m) = fd.det_reg;
      r += m;
    }
    model::DetCache dc;
    const model::DetOutput out = model::detect_batch(model_, F.det_raw, b.domain, &dc);
    const refine::DetLoss dl = refine::weighted_det_loss(out.prob, cls, out.reg, reg_t, w);
    lb.det = dl.value;
    if (grads) model::detect_backward(model_, dc, lc.lambda_det * dl.grad_scores, lc.lambda_det * dl.grad_reg, *grads);
  }
  lb.total = lb.id + lc.lambda_ie * lb.ie + lc.lambda_cov * lb.cov + lc.lambda_det * lb.det;
  return lb;
}

LossBreakdown Trainer::batch_objective(const Batch& b, const std::vector<std::pair<int, int>>& pairs,
                                       model::ModelGrads* grads) const {
  return run_batch(b, pairs, grads, nullptr);
}

void Trainer::step(const Batch& b, const std::vector<std::pair<int, int>>& pairs, double lr, StepLog& log) {
  // First sighting of an identity initialises its prototype before the loss.
  {
    std::vector<const Vec*> rows;
    std::vector<int> labels;
    for (std::size_t fi : b.frames)
      for (const auto& box : frames_[fi].working) {
        rows.push_back(&box.feature);
        labels.push_back(box.identity && V_.contains(*box.identity) ? *box.identity : -1);
      }
    if (rows.size() >= 2) {
      const Mat x = model::embed_batch(model_, stack_features(rows, model_.raw_dim()), b.domain, nullptr);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0 && !V_.initialized(labels[i])) V_.set(labels[i], x.row(static_cast<Eigen::Index>(i)).transpose());
    }
  }

  model::ModelGrads g = model::ModelGrads::zeros(model_);
  g.reid_branch = model_.branch_for(model_.reid, b.domain);
  g.det_branch = model_.branch_for(model_.det, b.domain);
  Forward F;
  const LossBreakdown lb = run_batch(b, pairs, &g, &F);
  check_finite(lb.id, "id");
  check_finite(lb.ie, "ie");
  check_finite(lb.cov, "cov");
  check_finite(lb.det, "det");

  // Running statistics and domain prototypes see the pre-step activations.
  if (F.raw.rows() >= 2) model_.reid.forward_train(F.raw * model_.W, g.reid_branch, F.raw, nullptr);
  if (F.det_raw.rows() >= 2) model_.det.forward_train(F.det_raw, g.det_branch, F.det_raw, nullptr);
  sgd_.step(model_, g, lr);

  for (std::size_t i = 0; i < F.boxes.size() && F.x.rows() > 0; ++i) {
    const Vec xi = F.x.row(static_cast<Eigen::Index>(i)).transpose();
    const synth::BoxAnn& box = *F.boxes[i];
    if (box.identity && V_.contains(*box.identity)) {
      V_.update(*box.identity, xi);
      halves_.update(*box.identity, F.halves[i], xi);
    } else if (!box.identity) {
      U_.push(xi);
    }
  }
  log.domain = b.domain;
  log.instances = static_cast<int>(F.boxes.size());
  log.loss = lb;
}

labelgen::AssignStats Trainer::regenerate_labels() {
  labelgen::AssignStats total;
  for (auto& fd : frames_) {
    fd.working = fd.base;
    if (fd.base.empty()) continue;
    const auto vit = video_identities_.find(fd.video_id);
    if (vit == video_identities_.end()) continue;
    std::vector<int> ids;
    for (int id : vit->second)
      if (V_.initialized(id)) ids.push_back(id);
    if (ids.empty()) continue;
    Mat protos(static_cast<Eigen::Index>(ids.size()), model_.embed_dim());
    for (std::size_t k = 0; k < ids.size(); ++k) protos.row(static_cast<Eigen::Index>(k)) = V_.prototype(ids[k]).transpose();
    std::vector<const Vec*> rows;
    for (const auto& b : fd.base) rows.push_back(&b.feature);
    const Mat emb = model::embed_infer(model_, stack_features(rows, model_.raw_dim()), fd.domain_id);
    labelgen::AssignStats st;
    fd.working = labelgen::generate_frame_labels(fd.base, ids, protos, emb, cfg_.labelgen.psi, &st);
    total.examined += st.examined;
    total.added += st.added;
  }
  return total;
}

EpochLog Trainer::train_epoch(int epoch) {
  EpochLog log;
  log.epoch = epoch;
  log.lr = lr_at(epoch);
  if (cfg_.train.toggles.mlg && epoch > 0) {
    const auto st = regenerate_labels();
    log.pseudo_examined = st.examined;
    log.pseudo_added = st.added;
  }
  for (const auto& fd : frames_)
    for (const auto& b : fd.working) log.pseudo_total += b.source == synth::Source::pseudo ? 1 : 0;

  Rng pair_rng = keyed_rng(cfg_.train.seed, kTagPairs, static_cast<std::uint64_t>(epoch));
  const auto batches = make_batches(rng_);
  int stepno = 0;
  for (const Batch& b : batches) {
    StepLog sl;
    sl.epoch = epoch;
    sl.step = stepno++;
    step(b, sample_pairs(pair_rng), log.lr, sl);
    log.loss.id += sl.loss.id;
    log.loss.ie += sl.loss.ie;
    log.loss.cov += sl.loss.cov;
    log.loss.det += sl.loss.det;
    log.loss.total += sl.loss.total;
    steps_.push_back(sl);
  }
  log.batches = static_cast<int>(batches.size());
  if (log.batches > 0) {
    const double k = 1.0 / log.batches;
    log.loss.id *= k;
    log.loss.ie *= k;
    log.loss.cov *= k;
    log.loss.det *= k;
    log.loss.total *= k;
  }

  if (cfg_.train.toggles.fd) {
    std::vector<int> labels;
    std::vector<Eigen::Index> rows;
    for (int l : V_.labels())
      if (V_.initialized(l)) {
        labels.push_back(l);
        rows.push_back(V_.row_of(l));
      }
    if (std::set<int>(labels.begin(), labels.end()).size() >= 2) {
      Mat P(static_cast<Eigen::Index>(rows.size()), V_.dim());
      for (std::size_t k = 0; k < rows.size(); ++k) P.row(static_cast<Eigen::Index>(k)) = V_.matrix().row(rows[k]);
      const auto clf = idselect::train_probe(P, labels, cfg_.idselect, keyed_rng(cfg_.train.seed, kTagProbe, static_cast<std::uint64_t>(epoch))());
      try {
        mask_ = idselect::select_mask(P, labels, clf, cfg_.idselect.t);
      } catch (const DegenerateInput&) {
        // Probe too weak for the budget; keep the previous mask.
      }
    }
  }
  log.mask_size = mask_ ? mask_->count() : 0;
  return log;
}

FitResult fit(const Config& cfg, const synth::Dataset& train, const synth::Dataset* heldout,
              const EpochCallback& on_epoch) {
  Trainer tr(cfg, train);
  FitResult res;
  for (int e = 0; e < cfg.train.epochs; ++e) {
    EpochLog log = tr.train_epoch(e);
    if (heldout) log.heldout = eval::evaluate_heldout(tr.model(), *heldout, cfg.eval);
    if (on_epoch) on_epoch(log);
    res.epochs.push_back(std::move(log));
  }
  if (heldout) res.metrics = res.epochs.empty() ? eval::evaluate_heldout(tr.model(), *heldout, cfg.eval)
                                                : res.epochs.back().heldout;
  res.model = tr.model();
  res.identities = tr.identities();
  res.queue = tr.queue();
  res.halves = tr.halves();
  res.mask = tr.mask();
  res.steps = tr.steps();
  return res;
}

std::vector<AblationRow> ablation_rows() {
  auto t = [](bool a, bool b, bool c, bool d, bool e, bool f) { return Toggles{a, b, c, d, e, f}; };
  return {
      {"baseline", t(false, false, false, false, false, false)},
      {"mdsbn", t(true, false, false, false, false, false)},
      {"br", t(false, true, false, false, false, false)},
      {"mdsbn+br", t(true, true, false, false, false, false)},
      {"mdsbn+br+mlg", t(true, true, true, false, false, false)},
      {"mdsbn+br+fd", t(true, true, false, true, false, false)},
      {"mdsbn+br+mlg+fd", t(true, true, true, true, false, false)},
      {"mdsbn+br+mlg+fd+ie", t(true, true, true, true, true, false)},
      {"mdsbn+br+mlg+fd+id", t(true, true, true, true, false, true)},
      {"full", t(true, true, true, true, true, true)},
  };
}

std::vector<AblationResult> run_ablation(const Config& base, const synth::Dataset& train,
                                         const synth::Dataset& heldout, const std::vector<AblationRow>& rows,
                                         const std::vector<std::uint64_t>& seeds, int jobs) {
  std::vector<AblationResult> out(rows.size() * seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < out.size(); k = next++) {
      const AblationRow& row = rows[k / seeds.size()];
      Config cfg = base;
      cfg.train.toggles = row.toggles;
      cfg.train.seed = seeds[k % seeds.size()];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        FitResult r = fit(cfg, train, &heldout);
        out[k] = {row.name, row.toggles, cfg.train.seed, *r.metrics,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mu);
        if (!failure) failure = std::current_exception();
        next = out.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(out.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

LabelQuality label_quality(const std::vector<FrameData>& frames) {
  LabelQuality q;
  for (const auto& f : frames) {
    std::set<int> seen;
    bool dup = false;
    for (const auto& b : f.working) {
      if (!b.identity) continue;
      dup = dup || !seen.insert(*b.identity).second;
      if (b.source != synth::Source::pseudo) continue;
      ++q.pseudo;
      q.correct += (b.truth.identity && *b.truth.identity == *b.identity) ? 1 : 0;
    }
    q.duplicate_frames += dup ? 1 : 0;
  }
  return q;
}

}  // namespace gps::train
