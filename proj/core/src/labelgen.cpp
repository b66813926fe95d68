#include "gps/labelgen.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace gps::labelgen {

Assignment Assignment::from_matrix(const Eigen::MatrixXi& A) {
  if (A.rows() != A.cols()) throw ContractViolation("assignment: matrix is not square");
  Assignment out;
  out.col_of_row.assign(static_cast<std::size_t>(A.rows()), -1);
  std::vector<int> col_sum(static_cast<std::size_t>(A.cols()), 0);
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    int row_sum = 0;
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      const int v = A(r, c);
      if (v != 0 && v != 1) throw ContractViolation("assignment: entries must be binary");
      if (v == 1) {
        ++row_sum;
        ++col_sum[static_cast<std::size_t>(c)];
        out.col_of_row[static_cast<std::size_t>(r)] = static_cast<int>(c);
      }
    }
    if (row_sum > 1) throw ContractViolation("assignment: row " + std::to_string(r) + " sums to more than 1");
  }
  for (std::size_t c = 0; c < col_sum.size(); ++c)
    if (col_sum[c] > 1) throw ContractViolation("assignment: column " + std::to_string(c) + " sums to more than 1");
  return out;
}

Eigen::MatrixXi Assignment::matrix() const {
  const auto n = static_cast<Eigen::Index>(col_of_row.size());
  Eigen::MatrixXi A = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    if (col_of_row[static_cast<std::size_t>(r)] >= 0) A(r, col_of_row[static_cast<std::size_t>(r)]) = 1;
  return A;
}

double Assignment::objective(const Mat& H) const {
  double s = 0.0;
  for (std::size_t r = 0; r < col_of_row.size(); ++r)
    if (col_of_row[r] >= 0) s += H(static_cast<Eigen::Index>(r), col_of_row[r]);
  return s;
}

WeightMatrix build_weight_matrix(std::span<const BoxAnn> boxes, std::span<const int> identities,
                                 const Mat& prototypes, const Mat& embeddings, double psi) {
  if (!(psi >= -1.0 && psi <= 1.0)) throw ConfigError("labelgen: psi must lie in [-1,1]");
  const auto nb = static_cast<Eigen::Index>(boxes.size());
  const auto nt = static_cast<Eigen::Index>(identities.size());
  if (embeddings.rows() != nb) throw ContractViolation("labelgen: one embedding per box required");
  if (prototypes.rows() != nt) throw ContractViolation("labelgen: one prototype per identity required");

  WeightMatrix W;
  const Eigen::Index l = std::max(nb, nt);
  W.H = Mat::Zero(l, l);
  W.box_index.assign(static_cast<std::size_t>(l), -1);
  W.identity_index.assign(static_cast<std::size_t>(l), -1);
  for (Eigen::Index i = 0; i < nb; ++i) W.box_index[static_cast<std::size_t>(i)] = static_cast<int>(i);
  for (Eigen::Index j = 0; j < nt; ++j) W.identity_index[static_cast<std::size_t>(j)] = identities[static_cast<std::size_t>(j)];

  for (Eigen::Index i = 0; i < nb; ++i) {
    const BoxAnn& b = boxes[static_cast<std::size_t>(i)];
    if (b.identity) {
      for (Eigen::Index j = 0; j < nt; ++j)
        if (identities[static_cast<std::size_t>(j)] == *b.identity) W.H(i, j) = 1.0;
      continue;
    }
    const double en = embeddings.row(i).norm();
    if (en == 0.0) continue;
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double pn = prototypes.row(j).norm();
      if (pn == 0.0) continue;
      const double c = embeddings.row(i).dot(prototypes.row(j)) / (en * pn);
      if (c > psi) W.H(i, j) = c;
    }
  }
  return W;
}

Assignment hungarian_max(const Mat& H) {
  if (H.rows() != H.cols()) throw ContractViolation("hungarian_max: matrix is not square");
  const int n = static_cast<int>(H.rows());
  Assignment out;
  out.col_of_row.assign(static_cast<std::size_t>(n), -1);
  if (n == 0) return out;

  const double top = H.maxCoeff();
  auto cost = [&](int r, int c) { return top - H(r, c); };
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; p[c] is the row matched to column c.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) out.col_of_row[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return out;
}

std::vector<BoxAnn> assign_labels(std::span<const BoxAnn> boxes, const WeightMatrix& W, const Assignment& A,
                                  double psi, AssignStats* stats) {
  const auto l = static_cast<std::size_t>(W.size());
  if (A.col_of_row.size() != l) throw ContractViolation("assign_labels: assignment size differs from weight matrix");
  std::vector<char> col_used(l, 0);
  for (int c : A.col_of_row) {
    if (c < -1 || c >= static_cast<int>(l)) throw ContractViolation("assign_labels: column index out of range");
    if (c >= 0) {
      if (col_used[static_cast<std::size_t>(c)]) throw ContractViolation("assign_labels: column assigned twice");
      col_used[static_cast<std::size_t>(c)] = 1;
    }
  }

  std::vector<BoxAnn> out(boxes.begin(), boxes.end());
  std::vector<int> held;
  for (const BoxAnn& b : out)
    if (b.identity) held.push_back(*b.identity);
  AssignStats st;
  for (std::size_t r = 0; r < l; ++r) {
    const int bi = W.box_index[r];
    if (bi < 0) continue;
    BoxAnn& b = out[static_cast<std::size_t>(bi)];
    if (b.identity) continue;
    ++st.examined;
    const int c = A.col_of_row[r];
    if (c < 0) continue;
    const int ident = W.identity_index[static_cast<std::size_t>(c)];
    if (ident < 0 || std::find(held.begin(), held.end(), ident) != held.end()) continue;
    if (W.H(static_cast<Eigen::Index>(r), c) > psi) {
      b.identity = ident;
      b.source = synth::Source::pseudo;
      ++st.added;
    }
  }
  if (stats) {
    stats->examined += st.examined;
    stats->added += st.added;
  }
  return out;
}

std::vector<BoxAnn> generate_frame_labels(std::span<const BoxAnn> boxes, std::span<const int> identities,
                                          const Mat& prototypes, const Mat& embeddings, double psi,
                                          AssignStats* stats) {
  const WeightMatrix W = build_weight_matrix(boxes, identities, prototypes, embeddings, psi);
  const Assignment A = hungarian_max(W.H);
  return assign_labels(boxes, W, A, psi, stats);
}

}  // namespace gps::labelgen
