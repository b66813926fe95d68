#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gps/common.hpp"
#include "gps/config.hpp"

namespace gps::synth {

enum class Source { original, auxiliary, pseudo };
enum class Half { first, second };

const char* to_string(Source s);
const char* to_string(Half h);
Source source_from_string(const std::string& s);
Half half_from_string(const std::string& s);

// Hidden ground truth. Lives in a sidecar file on disk; training code never
// reads it.
struct GroundTruth {
  std::optional<int> identity;  // nullopt for background
  Box box;
  bool person = false;
};

struct BoxAnn {
  int frame_id = 0;
  int video_id = 0;
  int domain_id = 0;
  Box box;
  double confidence = 1.0;
  std::optional<int> identity;
  Source source = Source::original;
  Vec feature;  // raw appearance at this box geometry
  GroundTruth truth;
};

// Detector candidate region, used by the detection stand-in for training and
// evaluation.
struct Proposal {
  Box box;
  Vec feature;
  GroundTruth truth;
};

struct Frame {
  int frame_id = 0;
  int video_id = 0;
  int domain_id = 0;
  int index = 0;  // position within the video
  Half half = Half::first;
  std::vector<BoxAnn> boxes;      // primary annotation source
  std::vector<BoxAnn> auxiliary;  // secondary detector output
  std::vector<Proposal> proposals;
};

struct Dataset {
  GeneratorConfig config;
  std::vector<Frame> frames;
  bool has_truth = true;

  std::vector<int> domains() const;
  std::size_t box_count() const;
};

struct CorruptionLog {
  int labeled_before = 0;
  int cleared = 0;
  int dropped = 0;
  int gross = 0;
  int false_boxes = 0;
  int auxiliary = 0;
};

// AR(1) coefficient whose correlation curve rho^k best fits
// exp(-k^2 / 2 sigma^2) over k in [1, 3 sigma] (least squares).
double calibrate_rho(double sigma);

// Expected same-identity cosine at a frame gap: (1-b) exp(-gap^2/2sigma^2) + b.
double similarity_decay(double gap, double sigma, double floor);

// Appearance trajectory of one identity: a(t) = sqrt(b) base + sqrt(1-b) w(t).
// base is a unit vector in the stable identity channels, w an AR walk on the
// unit sphere of the drift_dim trailing identity channels. A null base is
// drawn from rng.
std::vector<Vec> appearance_track(const GeneratorConfig& cfg, Rng& rng, int frames, const Vec* base = nullptr);
Vec identity_base(const GeneratorConfig& cfg, Rng& rng);

Dataset generate_dataset(const GeneratorConfig& cfg);

Dataset corrupt(const Dataset& clean, const GeneratorConfig& cfg, CorruptionLog* log = nullptr);

// Throws ConfigError when the dataset has fewer than two domains.
std::pair<Dataset, Dataset> split(const Dataset& ds, int holdout_domain);

// Misalignment model: mixes the clean crop toward the frame background by
// contamination_gain * rms(offset) and writes the box-to-gt regression
// offset into the geometry channels.
Vec misaligned_feature(const GeneratorConfig& cfg, const Vec& clean, const Vec& background, const Box& box,
                       const Box& gt);
double jitter_magnitude(const Box& box, const Box& gt);
double confidence_from_jitter(double magnitude);

}  // namespace gps::synth
