#include "gps/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gps::loss {
namespace {

Mat centered(const Mat& K) {
  // H K H with H = I - 11^T/n.
  const Eigen::RowVectorXd col_mean = K.colwise().mean();
  const Vec row_mean = K.rowwise().mean();
  const double all = K.mean();
  Mat out = K;
  out.rowwise() -= col_mean;
  out.colwise() -= row_mean;
  out.array() += all;
  return out;
}

Mat rbf_gram(const Mat& z, double s) {
  const Eigen::Index n = z.rows();
  Mat K(n, n);
  const double inv = 1.0 / (2.0 * s * s);
  for (Eigen::Index a = 0; a < n; ++a) {
    K(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = std::exp(-(z.row(a) - z.row(b)).squaredNorm() * inv);
      K(a, b) = K(b, a) = v;
    }
  }
  return K;
}

// dL/dz for L = sum_ab P_ab K_ab where K = Gram(z).
Mat gram_backward(const Mat& z, const Mat& K, const Mat& P, KernelKind kind, double s) {
  if (kind == KernelKind::linear) return (P + P.transpose()) * z;
  const Eigen::Index n = z.rows();
  Mat g = Mat::Zero(n, z.cols());
  const Mat W = (P + P.transpose()).cwiseProduct(K);
  const double inv = 1.0 / (s * s);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (b == c) continue;
      g.row(c) += W(c, b) * (z.row(b) - z.row(c)) * inv;
    }
  }
  return g;
}

double bandwidth_for(const Mat& z, const KernelSpec& k) { return k.median_heuristic() ? median_bandwidth(z) : k.bandwidth; }

Mat as_col(const Vec& v) { return Mat(v); }

}  // namespace

const Mat& LossOutput::gradient(const std::string& name) const {
  auto it = grad.find(name);
  if (it == grad.end()) throw LookupError("loss output has no gradient named '" + name + "'");
  return it->second;
}

LossOutput id_loss(const Vec& x, int label, const mem::IdentityMemory& V, const Mat& U, const Mat& intra,
                   double tau) {
  if (!(tau > 0.0)) throw ConfigError("loss: temperature must be positive");
  const Eigen::Index pos = V.row_of(label);
  const auto& init = V.init_flags();
  if (!init[static_cast<std::size_t>(pos)]) throw ContractViolation("oim: prototype of identity " + std::to_string(label) + " is unset");
  const Eigen::Index d = x.size();
  if (V.dim() != d || (U.rows() > 0 && U.cols() != d) || (intra.rows() > 0 && intra.cols() != d))
    throw ContractViolation("oim: dimension mismatch");

  const Mat& M = V.matrix();
  Vec sv = (M * x) / tau;
  Vec su = U.rows() > 0 ? Vec((U * x) / tau) : Vec();
  Vec sc = intra.rows() > 0 ? Vec((intra * x) / tau) : Vec();

  double mx = sv[pos];
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (init[static_cast<std::size_t>(j)]) mx = std::max(mx, sv[j]);
  if (su.size()) mx = std::max(mx, su.maxCoeff());
  if (sc.size()) mx = std::max(mx, sc.maxCoeff());

  Vec ev = Vec::Zero(sv.size());
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (init[static_cast<std::size_t>(j)]) ev[j] = std::exp(sv[j] - mx);
  const Vec eu = (su.array() - mx).exp().matrix();
  const Vec ec = (sc.array() - mx).exp().matrix();
  const double Z = ev.sum() + eu.sum() + ec.sum();

  LossOutput out;
  out.value = -(sv[pos] - mx) + std::log(Z);
  Vec gx = (M.transpose() * ev) / (Z * tau) - M.row(pos).transpose() / tau;
  if (U.rows() > 0) gx += (U.transpose() * eu) / (Z * tau);
  if (intra.rows() > 0) gx += (intra.transpose() * ec) / (Z * tau);
  out.grad["x"] = gx;
  Mat gi(intra.rows(), d);
  for (Eigen::Index l = 0; l < intra.rows(); ++l) gi.row(l) = (ec[l] / (Z * tau)) * x.transpose();
  out.grad["intra"] = gi;
  return out;
}

LossOutput oim_loss(const Vec& x, int label, const mem::IdentityMemory& V, const Mat& U, double tau) {
  LossOutput out = id_loss(x, label, V, U, Mat(0, x.size()), tau);
  out.grad.erase("intra");
  return out;
}

LossOutput ie_triplet_loss(const Vec& anchor, const Mat& positives, const Mat& negatives, double margin) {
  LossOutput out;
  out.grad["anchor"] = Mat::Zero(anchor.size(), 1);
  if (positives.rows() == 0 || negatives.rows() == 0) {
    out.skipped = true;
    return out;
  }
  const double an = anchor.norm();
  if (an == 0.0) throw DegenerateInput("ie_triplet_loss: zero anchor");

  auto cosine = [&](const Mat& S, Eigen::Index r) { return S.row(r).dot(anchor) / (S.row(r).norm() * an); };
  // Hardest positive: largest distance = smallest cosine.
  Eigen::Index ip = 0, in = 0;
  double cp = cosine(positives, 0), cn = cosine(negatives, 0);
  for (Eigen::Index r = 1; r < positives.rows(); ++r)
    if (const double c = cosine(positives, r); c < cp) cp = c, ip = r;
  for (Eigen::Index r = 1; r < negatives.rows(); ++r)
    if (const double c = cosine(negatives, r); c > cn) cn = c, in = r;

  const double h = margin + (1.0 - cp) - (1.0 - cn);
  if (h <= 0.0) return out;
  out.value = h;
  auto dcos = [&](const Vec& v, double c) -> Vec { return v / (v.norm() * an) - c * anchor / (an * an); };
  out.grad["anchor"] = -dcos(positives.row(ip).transpose(), cp) + dcos(negatives.row(in).transpose(), cn);
  return out;
}

LossOutput cosine_decorr(const Vec& z_id, const Vec& z_ds) {
  if (z_id.size() != z_ds.size()) throw ContractViolation("cosine_decorr: length mismatch");
  const double n1 = z_id.norm(), n2 = z_ds.norm();
  if (n1 == 0.0 || n2 == 0.0) throw DegenerateInput("cosine_decorr: zero-norm column");
  LossOutput out;
  const double c = z_id.dot(z_ds) / (n1 * n2);
  out.value = c;
  out.grad["z_id"] = z_ds / (n1 * n2) - c * z_id / (n1 * n1);
  out.grad["z_ds"] = z_id / (n1 * n2) - c * z_ds / (n2 * n2);
  return out;
}

double median_bandwidth(const Mat& z) {
  const Eigen::Index n = z.rows();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) d.push_back((z.row(a) - z.row(b)).norm());
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

LossOutput hsic_fnorm(const Mat& z_id, const Mat& z_ds, const KernelSpec& kernel) {
  if (kernel.kind == KernelKind::random_features) return hsic_random_features(z_id, z_ds, kernel);
  const Eigen::Index n = z_id.rows();
  if (n < 2) throw ContractViolation("hsic_fnorm: needs at least 2 samples");
  if (z_ds.rows() != n) throw ContractViolation("hsic_fnorm: sample counts differ");
  if (!kernel.median_heuristic() && !(kernel.bandwidth > 0.0)) throw ConfigError("hsic_fnorm: bandwidth must be positive");

  double s1 = 1.0, s2 = 1.0;
  Mat F, G;
  if (kernel.kind == KernelKind::linear) {
    F = z_id * z_id.transpose();
    G = z_ds * z_ds.transpose();
  } else {
    s1 = bandwidth_for(z_id, kernel);
    s2 = bandwidth_for(z_ds, kernel);
    F = rbf_gram(z_id, s1);
    G = rbf_gram(z_ds, s2);
  }
  const double norm = 1.0 / static_cast<double>((n - 1) * (n - 1));
  const Mat Gc = centered(G);
  const Mat Fc = centered(F);
  LossOutput out;
  out.value = F.cwiseProduct(Gc).sum() * norm;
  out.grad["z_id"] = gram_backward(z_id, F, Gc * norm, kernel.kind, s1);
  out.grad["z_ds"] = gram_backward(z_ds, G, Fc * norm, kernel.kind, s2);
  return out;
}

LossOutput hsic_random_features(const Mat& z_id, const Mat& z_ds, const KernelSpec& kernel, bool with_grad) {
  const Eigen::Index n = z_id.rows();
  const int D = kernel.num_random_features;
  if (D <= 0) throw ConfigError("hsic_random_features: num_random_features must be >= 1");
  if (n < 2) throw ContractViolation("hsic_random_features: needs at least 2 samples");
  if (z_ds.rows() != n) throw ContractViolation("hsic_random_features: sample counts differ");

  const double scale = std::sqrt(2.0 / D);
  struct Side {
    Mat omega;  // p x D
    Vec phase;  // D
    Mat phi;    // n x D, centred
    Mat arg;    // n x D
  };
  auto features = [&](const Mat& z, std::uint64_t stream) {
    const double s = bandwidth_for(z, kernel);
    Rng rng = keyed_rng(kernel.feature_seed, stream);
    std::normal_distribution<double> nd(0.0, 1.0 / s);
    std::uniform_real_distribution<double> up(0.0, 2.0 * std::numbers::pi);
    Side sd;
    sd.omega.resize(z.cols(), D);
    for (Eigen::Index c = 0; c < D; ++c)
      for (Eigen::Index r = 0; r < z.cols(); ++r) sd.omega(r, c) = nd(rng);
    sd.phase.resize(D);
    for (Eigen::Index c = 0; c < D; ++c) sd.phase[c] = up(rng);
    sd.arg = (z * sd.omega).rowwise() + sd.phase.transpose();
    sd.phi = scale * sd.arg.array().cos().matrix();
    sd.phi.rowwise() -= sd.phi.colwise().mean();
    return sd;
  };
  const Side a = features(z_id, 1), b = features(z_ds, 2);
  const double norm = 1.0 / static_cast<double>((n - 1) * (n - 1));
  LossOutput out;
  // ||phi_a^T phi_b||^2 = tr(A B) with A, B the n x n feature Grams; use
  // whichever side is smaller.
  auto back = [&](const Side& sd, const Mat& dphi) {
    const Mat dargs = -scale * dphi.cwiseProduct(sd.arg.array().sin().matrix());
    return Mat(dargs * sd.omega.transpose());
  };
  if (D < n) {
    const Mat C = a.phi.transpose() * b.phi;
    out.value = C.squaredNorm() * norm;
    if (!with_grad) return out;
    out.grad["z_id"] = back(a, 2.0 * norm * b.phi * C.transpose());
    out.grad["z_ds"] = back(b, 2.0 * norm * a.phi * C);
    return out;
  }
  const Mat A = a.phi * a.phi.transpose();
  const Mat B = b.phi * b.phi.transpose();
  out.value = A.cwiseProduct(B).sum() * norm;
  if (!with_grad) return out;
  // Centring is linear and its adjoint is implicit: the Grams already have
  // centred columns.
  out.grad["z_id"] = back(a, 2.0 * norm * B * a.phi);
  out.grad["z_ds"] = back(b, 2.0 * norm * A * b.phi);
  return out;
}

LossOutput feature_decorrelation(const Mat& X, const std::vector<std::pair<int, int>>& pairs,
                                 const KernelSpec& kernel) {
  LossOutput out;
  out.grad["x"] = Mat::Zero(X.rows(), X.cols());
  if (pairs.empty() || X.rows() < 2) {
    out.skipped = true;
    return out;
  }
  const double w = 1.0 / static_cast<double>(pairs.size());
  Mat& gx = out.grad["x"];
  for (const auto& [i, j] : pairs) {
    const Vec zi = X.col(i), zj = X.col(j);
    if (zi.norm() > 0.0 && zj.norm() > 0.0) {
      const LossOutput c = cosine_decorr(zi, zj);
      // Squared cosine: drives the pair toward orthogonality rather than
      // toward anti-correlation.
      out.value += w * c.value * c.value;
      gx.col(i) += w * 2.0 * c.value * c.gradient("z_id");
      gx.col(j) += w * 2.0 * c.value * c.gradient("z_ds");
    }
    const LossOutput h = hsic_fnorm(as_col(zi), as_col(zj), kernel);
    out.value += w * h.value;
    gx.col(i) += w * h.gradient("z_id");
    gx.col(j) += w * h.gradient("z_ds");
  }
  return out;
}

LossOutput combine(const LossOutput& id, const LossOutput& ie, const LossOutput& cov, const LossOutput& det,
                   const LossWeights& w) {
  LossOutput out;
  out.value = id.value + w.ie * ie.value + w.cov * cov.value + w.det * det.value;
  auto acc = [&](const LossOutput& part, double weight) {
    for (const auto& [name, g] : part.grad) {
      auto it = out.grad.find(name);
      if (it == out.grad.end())
        out.grad.emplace(name, weight * g);
      else
        it->second += weight * g;
    }
  };
  acc(id, 1.0);
  acc(ie, w.ie);
  acc(cov, w.cov);
  acc(det, w.det);
  return out;
}

}  // namespace gps::loss
