#include "gps/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace gps::synth {
namespace {

constexpr std::uint64_t kTagDomain = 0x646f6d61;  // "doma"
constexpr std::uint64_t kTagVideo = 0x76696465;
constexpr std::uint64_t kTagCorrupt = 0x636f7272;
constexpr std::uint64_t kTagIdentity = 0x6964656e;
constexpr double kFrameW = 1000.0;
constexpr double kFrameH = 600.0;

struct DomainStyle {
  Vec signal;  // domain_signal_dim
  Vec gain;    // raw_dim
  Vec offset;  // raw_dim
};

Vec random_unit(Rng& rng, Eigen::Index n) {
  Vec v = gaussian_vec(rng, n);
  const double nv = v.norm();
  return nv > 0 ? Vec(v / nv) : Vec(Vec::Unit(n, 0));
}

DomainStyle make_domain(const GeneratorConfig& cfg, int domain) {
  Rng rng = keyed_rng(cfg.seed, kTagDomain, static_cast<std::uint64_t>(domain));
  DomainStyle s;
  s.signal = random_unit(rng, cfg.domain_signal_dim) * cfg.domain_scale;
  std::uniform_real_distribution<double> ug(1.0 - cfg.style_gain_spread, 1.0 + cfg.style_gain_spread);
  s.gain.resize(cfg.raw_dim);
  for (int i = 0; i < cfg.raw_dim; ++i) s.gain[i] = ug(rng);
  s.offset = gaussian_vec(rng, cfg.raw_dim, cfg.style_offset_std);
  return s;
}

// Unit-sphere AR(1) walk: w <- normalize(rho w + sqrt(1-rho^2) eps), with eps
// drawn so that E|eps| ~ 1. `basis` columns span the subspace the walk lives in.
std::vector<Vec> sphere_walk(Rng& rng, const Mat& basis, double rho, int frames) {
  const Eigen::Index k = basis.cols();
  std::vector<Vec> out;
  out.reserve(frames);
  Vec w = random_unit(rng, k);
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (int t = 0; t < frames; ++t) {
    if (t > 0) {
      Vec eps = gaussian_vec(rng, k, 1.0 / std::sqrt(static_cast<double>(k)));
      w = rho * w + innov * eps;
      w.normalize();
    }
    out.push_back(basis * w);
  }
  return out;
}

Box perturb(const Box& gt, const Eigen::Vector4d& tau) { return decode_box(gt, tau); }

Eigen::Vector4d draw_tau(Rng& rng, double stddev) {
  if (stddev <= 0.0) return Eigen::Vector4d::Zero();
  std::normal_distribution<double> nd(0.0, stddev);
  return {nd(rng), nd(rng), nd(rng), nd(rng)};
}

Vec compose(const GeneratorConfig& cfg, const DomainStyle& style, const Vec& id_part, const Vec& context,
            double objectness, Rng& rng) {
  Vec raw = Vec::Zero(cfg.raw_dim);
  raw.head(cfg.id_signal_dim) = id_part;
  raw.segment(cfg.id_signal_dim, cfg.domain_signal_dim) = style.signal + context;
  raw[cfg.objectness_dim()] = objectness;
  // Style is photometric: geometry channels carry alignment only.
  Vec gain = style.gain, offset = style.offset;
  gain.segment(cfg.geometry_offset(), 4).setOnes();
  offset.segment(cfg.geometry_offset(), 4).setZero();
  raw = raw.cwiseProduct(gain) + offset;
  if (cfg.noise_std > 0.0) raw += gaussian_vec(rng, cfg.raw_dim, cfg.noise_std);
  return raw;
}

Vec mean_background(const std::vector<Proposal>& props, Eigen::Index dim) {
  Vec m = Vec::Zero(dim);
  int n = 0;
  for (const auto& p : props) {
    if (!p.truth.person) {
      m += p.feature;
      ++n;
    }
  }
  return n > 0 ? Vec(m / n) : m;
}

struct Track {
  int identity = 0;
  int start = 0;
  int end = 0;  // exclusive
  std::vector<Vec> appearance;
  std::vector<Box> boxes;
};

std::vector<Box> box_path(Rng& rng, int frames) {
  std::uniform_real_distribution<double> uw(30.0, 70.0);
  const double w = uw(rng);
  const double h = 2.5 * w;
  std::uniform_real_distribution<double> ux(0.0, kFrameW - w);
  std::uniform_real_distribution<double> uy(0.0, kFrameH - h);
  std::normal_distribution<double> step(0.0, 4.0);
  double x = ux(rng), y = uy(rng);
  std::vector<Box> out;
  out.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    out.push_back({x, y, w, h});
    x = std::clamp(x + step(rng), 0.0, kFrameW - w);
    y = std::clamp(y + 0.5 * step(rng), 0.0, kFrameH - h);
  }
  return out;
}

void generate_video(const GeneratorConfig& cfg, const DomainStyle& style, int domain, int video, double rho,
                    std::vector<Frame>& frames_out) {
  const int F = cfg.frames_per_video;
  const int global_video = domain * cfg.videos_per_domain + video;
  Rng rng = keyed_rng(cfg.seed, kTagVideo, static_cast<std::uint64_t>(global_video));

  const Mat ctx_basis = Mat::Identity(cfg.domain_signal_dim, cfg.domain_signal_dim);
  const Vec scene = random_unit(rng, cfg.domain_signal_dim) * cfg.scene_scale;
  std::vector<Vec> context = sphere_walk(rng, ctx_basis, rho, F);
  for (auto& c : context) c = scene + c * cfg.context_scale;

  // Cross-view groups draw identity bases from a stream shared by the group.
  const bool crossview = cfg.crossview_videos > 1 && domain == cfg.resolved_benchmark_domain();
  const int owner_video = crossview ? domain * cfg.videos_per_domain + (video / cfg.crossview_videos) * cfg.crossview_videos
                                    : global_video;

  std::vector<Track> tracks;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < cfg.identities_per_video; ++i) {
    Track tr;
    tr.identity = owner_video * cfg.identities_per_video + i;
    const int min_len = std::max(2, static_cast<int>(std::ceil(cfg.min_presence * F)));
    std::uniform_int_distribution<int> ulen(min_len, F);
    const int len = ulen(rng);
    std::uniform_int_distribution<int> ustart(0, F - len);
    tr.start = ustart(rng);
    tr.end = tr.start + len;
    if (crossview) {
      Rng id_rng = keyed_rng(cfg.seed, kTagIdentity, static_cast<std::uint64_t>(owner_video), static_cast<std::uint64_t>(i));
      const Vec base = identity_base(cfg, id_rng);
      tr.appearance = appearance_track(cfg, rng, F, &base);
    } else {
      tr.appearance = appearance_track(cfg, rng, F);
    }
    tr.boxes = box_path(rng, F);
    tracks.push_back(std::move(tr));
  }

  std::uniform_real_distribution<double> ubw(30.0, 70.0);
  for (int t = 0; t < F; ++t) {
    Frame fr;
    fr.video_id = global_video;
    fr.domain_id = domain;
    fr.index = t;
    fr.frame_id = global_video * F + t;
    fr.half = (2 * t < F) ? Half::first : Half::second;

    std::vector<const Track*> present;
    for (const auto& tr : tracks)
      if (t >= tr.start && t < tr.end) present.push_back(&tr);

    // Background clutter proposals, kept away from people.
    for (int b = 0; b < cfg.background_per_frame; ++b) {
      Box bb;
      for (int attempt = 0; attempt < 20; ++attempt) {
        const double w = ubw(rng), h = 2.5 * w;
        bb = {u01(rng) * (kFrameW - w), u01(rng) * (kFrameH - h), w, h};
        bool clear = true;
        for (const Track* tr : present) clear = clear && iou(bb, tr->boxes[t]) < 0.2;
        if (clear) break;
      }
      Proposal p;
      p.box = bb;
      p.feature = compose(cfg, style, random_unit(rng, cfg.id_signal_dim) * (0.5 * cfg.id_scale), context[t], 0.0, rng);
      p.truth = {std::nullopt, bb, false};
      fr.proposals.push_back(std::move(p));
    }
    const Vec background = mean_background(fr.proposals, cfg.raw_dim);

    for (const Track* tr : present) {
      BoxAnn b;
      b.frame_id = fr.frame_id;
      b.video_id = fr.video_id;
      b.domain_id = domain;
      b.box = tr->boxes[t];
      b.confidence = 1.0;
      b.identity = tr->identity;
      b.source = Source::original;
      b.feature = compose(cfg, style, tr->appearance[t] * cfg.id_scale, context[t], cfg.objectness_scale, rng);
      b.truth = {tr->identity, b.box, true};

      Proposal p;
      p.box = perturb(b.box, draw_tau(rng, cfg.proposal_jitter_std));
      p.feature = misaligned_feature(cfg, b.feature, background, p.box, b.box);
      p.truth = b.truth;
      fr.proposals.push_back(std::move(p));
      fr.boxes.push_back(std::move(b));
    }
    frames_out.push_back(std::move(fr));
  }
}

}  // namespace

const char* to_string(Source s) {
  switch (s) {
    case Source::original: return "original";
    case Source::auxiliary: return "auxiliary";
    case Source::pseudo: return "pseudo";
  }
  return "original";
}

const char* to_string(Half h) { return h == Half::first ? "first" : "second"; }

Source source_from_string(const std::string& s) {
  if (s == "original") return Source::original;
  if (s == "auxiliary") return Source::auxiliary;
  if (s == "pseudo") return Source::pseudo;
  throw ConfigError("dataset: unknown box source '" + s + "'");
}

Half half_from_string(const std::string& s) {
  if (s == "first") return Half::first;
  if (s == "second") return Half::second;
  throw ConfigError("dataset: unknown frame half '" + s + "'");
}

std::vector<int> Dataset::domains() const {
  std::set<int> d;
  for (const auto& f : frames) d.insert(f.domain_id);
  return {d.begin(), d.end()};
}

std::size_t Dataset::box_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.boxes.size();
  return n;
}

double similarity_decay(double gap, double sigma, double floor) {
  return (1.0 - floor) * std::exp(-gap * gap / (2.0 * sigma * sigma)) + floor;
}

double calibrate_rho(double sigma) {
  const int kmax = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  auto err = [&](double rho) {
    double e = 0.0;
    for (int k = 1; k <= kmax; ++k) {
      const double d = std::pow(rho, k) - std::exp(-k * k / (2.0 * sigma * sigma));
      e += d * d;
    }
    return e;
  };
  // Golden-section search; the objective is unimodal on (0,1).
  double lo = 0.0, hi = 1.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = err(a), fb = err(b);
  for (int it = 0; it < 100; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = err(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = err(b);
    }
  }
  return 0.5 * (lo + hi);
}

Vec identity_base(const GeneratorConfig& cfg, Rng& rng) {
  Vec base = Vec::Zero(cfg.id_signal_dim);
  base.head(cfg.id_signal_dim - cfg.drift_dim) = random_unit(rng, cfg.id_signal_dim - cfg.drift_dim);
  return base;
}

std::vector<Vec> appearance_track(const GeneratorConfig& cfg, Rng& rng, int frames, const Vec* base) {
  const int n = cfg.id_signal_dim;
  const Vec b = base ? *base : identity_base(cfg, rng);
  const Mat drift_basis = Mat::Identity(n, n).rightCols(cfg.drift_dim);
  const double rho = calibrate_rho(cfg.decay_sigma);
  std::vector<Vec> w = sphere_walk(rng, drift_basis, rho, frames);
  const double sb = std::sqrt(cfg.decay_floor), sw = std::sqrt(1.0 - cfg.decay_floor);
  std::vector<Vec> out;
  out.reserve(frames);
  for (const auto& wt : w) out.push_back(sb * b + sw * wt);
  return out;
}

double jitter_magnitude(const Box& box, const Box& gt) { return encode_box(gt, box).norm() / 2.0; }

double confidence_from_jitter(double magnitude) { return std::clamp(1.0 - 2.0 * magnitude, 0.0, 1.0); }

Vec misaligned_feature(const GeneratorConfig& cfg, const Vec& clean, const Vec& background, const Box& box,
                       const Box& gt) {
  const double mag = jitter_magnitude(box, gt);
  const double c = std::min(1.0, cfg.contamination_gain * mag);
  Vec f = (1.0 - c) * clean + c * background;
  f.segment(cfg.geometry_offset(), 4) += cfg.geometry_gain * encode_box(box, gt);
  return f;
}

Dataset generate_dataset(const GeneratorConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.has_truth = true;
  const double rho = calibrate_rho(cfg.decay_sigma);
  for (int d = 0; d < cfg.num_domains; ++d) {
    const DomainStyle style = make_domain(cfg, d);
    for (int v = 0; v < cfg.videos_per_domain; ++v) generate_video(cfg, style, d, v, rho, ds.frames);
  }
  return ds;
}

Dataset corrupt(const Dataset& clean, const GeneratorConfig& cfg, CorruptionLog* log) {
  cfg.validate();
  Dataset out;
  out.config = cfg;
  out.has_truth = clean.has_truth;
  out.frames.reserve(clean.frames.size());
  CorruptionLog lg;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ulow(0.05, 0.35);

  // Omission state per (video, identity): a two-state chain whose stationary
  // rate is omission_rate, so cleared labels come in runs.
  std::map<std::pair<int, int>, bool> omitted_prev;
  const double p_stay = cfg.omission_persistence + (1.0 - cfg.omission_persistence) * cfg.omission_rate;
  const double p_enter = (1.0 - cfg.omission_persistence) * cfg.omission_rate;
  for (const Frame& src : clean.frames) {
    Rng rng = keyed_rng(cfg.seed, kTagCorrupt, static_cast<std::uint64_t>(src.frame_id));
    Frame fr = src;
    fr.boxes.clear();
    fr.auxiliary.clear();
    const Vec background = mean_background(src.proposals, cfg.raw_dim);

    for (const BoxAnn& gtb : src.boxes) {
      // Draw every variate unconditionally so the stream stays aligned when
      // rates change.
      const double u_drop = u01(rng), u_gross = u01(rng), u_omit = u01(rng), u_aux = u01(rng);
      const Eigen::Vector4d tau_unit = draw_tau(rng, 1.0);
      const Eigen::Vector4d tau_aux = draw_tau(rng, 1.0);

      if (u_aux >= cfg.aux_miss_rate) {
        BoxAnn a = gtb;
        a.box = perturb(gtb.truth.box, tau_aux * cfg.aux_jitter_std);
        a.feature = misaligned_feature(cfg, gtb.feature, background, a.box, gtb.truth.box);
        a.confidence = confidence_from_jitter(jitter_magnitude(a.box, gtb.truth.box));
        a.identity.reset();
        a.source = Source::auxiliary;
        fr.auxiliary.push_back(std::move(a));
        ++lg.auxiliary;
      }
      if (u_drop < cfg.box_drop_rate) {
        ++lg.dropped;
        continue;
      }
      BoxAnn b = gtb;
      const bool gross = u_gross < cfg.gross_jitter_rate;
      lg.gross += gross ? 1 : 0;
      const double scale = cfg.jitter_std * (gross ? cfg.gross_jitter_scale : 1.0);
      if (scale > 0.0) {
        b.box = perturb(gtb.truth.box, tau_unit * scale);
        b.feature = misaligned_feature(cfg, gtb.feature, background, b.box, gtb.truth.box);
      }
      b.confidence = confidence_from_jitter(jitter_magnitude(b.box, gtb.truth.box));
      if (b.identity) {
        ++lg.labeled_before;
        const auto key = std::make_pair(src.video_id, *b.identity);
        const auto prev = omitted_prev.find(key);
        const double p = prev == omitted_prev.end() ? cfg.omission_rate : (prev->second ? p_stay : p_enter);
        const bool omit = u_omit < p;
        omitted_prev[key] = omit;
        if (omit) {
          b.identity.reset();
          ++lg.cleared;
        }
      }
      fr.boxes.push_back(std::move(b));
    }

    for (const Proposal& p : src.proposals) {
      if (p.truth.person) continue;
      const double u_false = u01(rng), u_false_aux = u01(rng);
      const double c1 = ulow(rng), c2 = ulow(rng);
      auto make = [&](Source s, double conf) {
        BoxAnn b;
        b.frame_id = src.frame_id;
        b.video_id = src.video_id;
        b.domain_id = src.domain_id;
        b.box = p.box;
        b.confidence = conf;
        b.source = s;
        b.feature = p.feature;
        b.truth = p.truth;
        return b;
      };
      if (u_false < cfg.false_box_rate) {
        fr.boxes.push_back(make(Source::original, c1));
        ++lg.false_boxes;
      }
      if (u_false_aux < 0.5 * cfg.false_box_rate) fr.auxiliary.push_back(make(Source::auxiliary, c2));
    }
    out.frames.push_back(std::move(fr));
  }
  if (log) *log = lg;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, int holdout_domain) {
  const auto doms = ds.domains();
  if (doms.size() < 2) throw ConfigError("split: needs at least 2 domains, dataset has " + std::to_string(doms.size()));
  if (std::find(doms.begin(), doms.end(), holdout_domain) == doms.end())
    throw ConfigError("split: holdout domain " + std::to_string(holdout_domain) + " not present in dataset");
  Dataset train, held;
  train.config = held.config = ds.config;
  train.has_truth = held.has_truth = ds.has_truth;
  for (const auto& f : ds.frames) (f.domain_id == holdout_domain ? held : train).frames.push_back(f);
  return {std::move(train), std::move(held)};
}

}  // namespace gps::synth
