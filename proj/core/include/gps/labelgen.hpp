#pragma once

#include <span>
#include <vector>

#include "gps/synthdata.hpp"

namespace gps::labelgen {

using synth::BoxAnn;

// Box-to-identity weights, zero padded to l x l with l = max(|B|, |T|).
struct WeightMatrix {
  Mat H;
  std::vector<int> box_index;       // row -> box position, -1 for padding
  std::vector<int> identity_index;  // column -> identity label, -1 for padding
  Eigen::Index size() const { return H.rows(); }
};

// Row r is matched to column col_of_row[r], or -1 when unmatched.
struct Assignment {
  std::vector<int> col_of_row;

  // Throws ContractViolation if a row or column sum exceeds 1.
  static Assignment from_matrix(const Eigen::MatrixXi& A);
  Eigen::MatrixXi matrix() const;
  // ||A . H||_1, accumulated in row order.
  double objective(const Mat& H) const;
};

// identities[j] is the label of prototypes.row(j); embeddings.row(i) belongs
// to boxes[i]. Unlabeled boxes get cos(b_i, t_j) where it exceeds psi; a
// labeled box gets 1 at its own identity's column.
WeightMatrix build_weight_matrix(std::span<const BoxAnn> boxes, std::span<const int> identities,
                                 const Mat& prototypes, const Mat& embeddings, double psi);

// Maximum-weight perfect matching on a square matrix (Kuhn-Munkres with
// potentials). Columns are scanned in index order with strict comparisons,
// so equal-weight optima resolve toward low indices deterministically.
Assignment hungarian_max(const Mat& H);

struct AssignStats {
  int examined = 0;  // unlabeled boxes considered
  int added = 0;
};

// Unlabeled box i takes identity t_j iff A_ij = 1 and H_ij > psi. Existing
// labels are never touched.
std::vector<BoxAnn> assign_labels(std::span<const BoxAnn> boxes, const WeightMatrix& W, const Assignment& A,
                                  double psi, AssignStats* stats = nullptr);

// build_weight_matrix + hungarian_max + assign_labels for one frame.
std::vector<BoxAnn> generate_frame_labels(std::span<const BoxAnn> boxes, std::span<const int> identities,
                                          const Mat& prototypes, const Mat& embeddings, double psi,
                                          AssignStats* stats = nullptr);

}  // namespace gps::labelgen
