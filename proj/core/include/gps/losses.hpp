#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gps/config.hpp"
#include "gps/protomem.hpp"

namespace gps::loss {

struct LossOutput {
  double value = 0.0;
  std::map<std::string, Mat> grad;
  bool skipped = false;  // term had no valid inputs and contributes nothing

  const Mat& gradient(const std::string& name) const;
};

// OIM: softmax of x against every initialised identity prototype plus the
// negative-queue rows (U, oldest first). Gradient "x".
LossOutput oim_loss(const Vec& x, int label, const mem::IdentityMemory& V, const Mat& U, double tau);

// OIM with the denominator extended by same-frame negatives (rows of
// intra). Gradients "x" and "intra".
LossOutput id_loss(const Vec& x, int label, const mem::IdentityMemory& V, const Mat& U, const Mat& intra,
                   double tau);

// Hinge on margin + max_pos d(a,v) - min_neg d(a,v) with d = 1 - cos.
// Empty positives or negatives skip the term. Gradient "anchor".
LossOutput ie_triplet_loss(const Vec& anchor, const Mat& positives, const Mat& negatives, double margin);

// Signed cosine between two columns. Gradients "z_id", "z_ds".
LossOutput cosine_decorr(const Vec& z_id, const Vec& z_ds);

// tr(F H G H) / (n-1)^2 with F, G Gram matrices of the rows of z_id (n x p)
// and z_ds (n x q). Linear and Gaussian RBF kernels; random_features
// dispatches to hsic_random_features. Gradients "z_id", "z_ds". With the
// median heuristic the bandwidth is treated as a constant in the gradient.
LossOutput hsic_fnorm(const Mat& z_id, const Mat& z_ds, const KernelSpec& kernel);

// Squared Frobenius norm of the cross-covariance between D random Fourier
// features per side; approximates the RBF statistic.
LossOutput hsic_random_features(const Mat& z_id, const Mat& z_ds, const KernelSpec& kernel, bool with_grad = true);

// Median pairwise Euclidean distance between rows; 1 if degenerate.
double median_bandwidth(const Mat& z);

// Decorrelation term over sampled (id column, ds column) pairs of a batch
// of embeddings X (n x d): mean over pairs of cos^2 + HSIC. Gradient "x".
LossOutput feature_decorrelation(const Mat& X, const std::vector<std::pair<int, int>>& pairs,
                                 const KernelSpec& kernel);

struct LossWeights {
  double cov = 0.0;
  double ie = 0.0;
  double det = 0.0;
};

// id + w.ie * ie + w.cov * cov + w.det * det, gradients summed by name.
LossOutput combine(const LossOutput& id, const LossOutput& ie, const LossOutput& cov, const LossOutput& det,
                   const LossWeights& w);

}  // namespace gps::loss
