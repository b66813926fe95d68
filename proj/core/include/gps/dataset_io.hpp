#pragma once

#include <optional>
#include <string>

#include "gps/synthdata.hpp"

namespace gps::io {

inline constexpr int kDatasetFormatVersion = 1;

// Line-delimited JSON: a versioned header line followed by one frame per
// line. Ground truth goes to a separate sidecar with the same layout so the
// training path can load observations alone.
void write_dataset(const synth::Dataset& ds, const std::string& frames_path, const std::string& truth_path,
                   const std::string& manifest_hash);

// Pass truth_path = nullopt to load observations only (has_truth = false).
synth::Dataset read_dataset(const std::string& frames_path, const std::optional<std::string>& truth_path);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);

}  // namespace gps::io
