#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gps/config.hpp"
#include "gps/eval.hpp"
#include "gps/idselect.hpp"
#include "gps/labelgen.hpp"
#include "gps/losses.hpp"
#include "gps/model.hpp"
#include "gps/protomem.hpp"
#include "gps/synthdata.hpp"

namespace gps::train {

// Per-frame training view: refined original annotations, the working set
// (original plus pseudo labels) and the detector targets on proposals.
struct FrameData {
  int frame_id = 0;
  int video_id = 0;
  int domain_id = 0;
  synth::Half half = synth::Half::first;
  std::vector<synth::BoxAnn> base;
  std::vector<synth::BoxAnn> working;
  Mat proposal_raw;  // n_p x raw_dim
  std::vector<Box> proposal_box;
  Vec det_cls;
  Mat det_reg;  // n_p x 4
  Vec det_weight;
};

// Builds the training view; BR selects merge + hard filter and soft weights.
std::vector<FrameData> prepare_frames(const synth::Dataset& train, const Config& cfg);

struct LossBreakdown {
  double id = 0.0;
  double ie = 0.0;
  double cov = 0.0;
  double det = 0.0;
  double total = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  LossBreakdown loss;  // means over batches
  int batches = 0;
  int pseudo_examined = 0;
  int pseudo_added = 0;
  int pseudo_total = 0;
  int mask_size = 0;  // ID-relevant dimensions kept, 0 before the first mask
  std::optional<eval::BenchmarkMetrics> heldout;
};

struct StepLog {
  int epoch = 0;
  int step = 0;
  int domain = 0;
  int instances = 0;
  LossBreakdown loss;
};

// One batch of whole frames from a single domain (or mixed when no head is
// domain-specific).
struct Batch {
  int domain = 0;
  std::vector<std::size_t> frames;
};

class Trainer {
 public:
  Trainer(const Config& cfg, const synth::Dataset& train);

  // MLG refresh (epochs after the first), batches, mask selection.
  EpochLog train_epoch(int epoch);

  // Loss and gradients of one batch at the current state, with no writes
  // to parameters or memories. pairs are the decorrelation column pairs.
  LossBreakdown batch_objective(const Batch& b, const std::vector<std::pair<int, int>>& pairs,
                                model::ModelGrads* grads) const;

  std::vector<Batch> make_batches(Rng& rng) const;
  double lr_at(int epoch) const;

  const Config& config() const { return cfg_; }
  const model::Model& model() const { return model_; }
  model::Model& model() { return model_; }
  const mem::IdentityMemory& identities() const { return V_; }
  mem::IdentityMemory& identities() { return V_; }
  const mem::NegativeQueue& queue() const { return U_; }
  mem::NegativeQueue& queue() { return U_; }
  const mem::HalfPrototypes& halves() const { return halves_; }
  mem::HalfPrototypes& halves() { return halves_; }
  const std::vector<FrameData>& frames() const { return frames_; }
  const std::optional<idselect::ChannelMask>& mask() const { return mask_; }
  void set_mask(std::optional<idselect::ChannelMask> m) { mask_ = std::move(m); }
  const std::vector<StepLog>& steps() const { return steps_; }

  // Pseudo-label pass over every frame with the current model and memory.
  labelgen::AssignStats regenerate_labels();
  // Decorrelation pairs for one batch, empty when FD is off or no mask yet.
  std::vector<std::pair<int, int>> sample_pairs(Rng& rng) const;

 private:
  struct Forward;
  LossBreakdown run_batch(const Batch& b, const std::vector<std::pair<int, int>>& pairs, model::ModelGrads* grads,
                          Forward* fwd) const;
  void step(const Batch& b, const std::vector<std::pair<int, int>>& pairs, double lr, StepLog& log);
  void init_running_stats();

  Config cfg_;
  std::vector<FrameData> frames_;
  std::map<int, std::vector<int>> video_identities_;
  model::Model model_;
  model::Sgd sgd_;
  mem::IdentityMemory V_;
  mem::NegativeQueue U_;
  mem::HalfPrototypes halves_;
  std::optional<idselect::ChannelMask> mask_;
  std::vector<StepLog> steps_;
  Rng rng_;
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct FitResult {
  model::Model model;
  mem::IdentityMemory identities;
  mem::NegativeQueue queue;
  mem::HalfPrototypes halves;
  std::optional<idselect::ChannelMask> mask;
  std::vector<EpochLog> epochs;
  std::vector<StepLog> steps;
  std::optional<eval::BenchmarkMetrics> metrics;
};

// Full schedule. With a held-out set, metrics are computed after every epoch
// and for the final model (also when epochs == 0).
FitResult fit(const Config& cfg, const synth::Dataset& train, const synth::Dataset* heldout = nullptr,
              const EpochCallback& on_epoch = {});

// Table-1 style toggle rows: baseline, single modules, cumulative chain.
struct AblationRow {
  std::string name;
  Toggles toggles;
};
std::vector<AblationRow> ablation_rows();

struct AblationResult {
  std::string name;
  Toggles toggles;
  std::uint64_t seed = 0;
  eval::BenchmarkMetrics metrics;
  double seconds = 0.0;
};

// Every (row, seed) pair, each job single-threaded; results are ordered by
// row then seed whatever the job count.
std::vector<AblationResult> run_ablation(const Config& base, const synth::Dataset& train,
                                         const synth::Dataset& heldout, const std::vector<AblationRow>& rows,
                                         const std::vector<std::uint64_t>& seeds, int jobs);

// Scores the working label set against the hidden truth. Evaluation only.
struct LabelQuality {
  int pseudo = 0;
  int correct = 0;
  int duplicate_frames = 0;  // frames where one identity labels two boxes
  double precision() const { return pseudo > 0 ? static_cast<double>(correct) / pseudo : 1.0; }
};
LabelQuality label_quality(const std::vector<FrameData>& frames);

}  // namespace gps::train
