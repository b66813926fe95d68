#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gps {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy shared by every module. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class InferenceError : public Error {
 public:
  using Error::Error;
};

// Axis-aligned box, (x, y) is the top-left corner.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  bool operator==(const Box&) const = default;
};

double iou(const Box& a, const Box& b);

// Regression parameterisation of `target` relative to `anchor`:
// (dx/w, dy/h, log(tw/w), log(th/h)) on box centres.
Eigen::Vector4d encode_box(const Box& anchor, const Box& target);
Box decode_box(const Box& anchor, const Eigen::Vector4d& delta);

using Rng = std::mt19937_64;

// Independent deterministic stream for (seed, tag, a, b). Lets per-video
// generation run in any order and still produce identical output.
Rng keyed_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0);

// Stable 64-bit FNV-1a, used for manifest and file hashes.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);

// Standard normal vector of length n.
Vec gaussian_vec(Rng& rng, Eigen::Index n, double stddev = 1.0);

}  // namespace gps
