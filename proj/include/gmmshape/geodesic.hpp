#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "gmmshape/model.hpp"
#include "gmmshape/spd.hpp"

namespace gmmshape {

template <typename Scalar>
using SphereVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A K-component mixture as a point of S^(K-1) × R^(3×K) × (P_3)^K, using
/// the square-root map on the weights.
template <typename Scalar>
class ProductPoint {
 public:
  ProductPoint(SphereVector<Scalar> sqrt_weights, Points3<Scalar> means, std::vector<Mat3<Scalar>> covariances)
      : sqrt_weights_(std::move(sqrt_weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
    const Eigen::Index k = sqrt_weights_.size();
    if (k < 1) throw InvalidArgument("product point needs at least one component");
    if (means_.cols() != k || static_cast<Eigen::Index>(covariances_.size()) != k) {
      throw InvalidArgument("product point slots disagree on K");
    }
    if ((sqrt_weights_.array() < Scalar(0)).any()) throw InvalidArgument("square-root weights must be nonnegative");
    if (std::abs(sqrt_weights_.norm() - Scalar(1)) > Scalar(1e-12)) {
      throw InvalidArgument("square-root weights must have unit norm");
    }
    if (!means_.allFinite()) throw InvalidArgument("product point means must be finite");
    for (const auto& c : covariances_) require_spd(c, "product point covariance");
  }

  int size() const { return static_cast<int>(sqrt_weights_.size()); }
  const SphereVector<Scalar>& sqrt_weights() const { return sqrt_weights_; }
  const Points3<Scalar>& means() const { return means_; }
  const std::vector<Mat3<Scalar>>& covariances() const { return covariances_; }

 private:
  SphereVector<Scalar> sqrt_weights_;
  Points3<Scalar> means_;
  std::vector<Mat3<Scalar>> covariances_;
};

template <typename Scalar>
ProductPoint<Scalar> gmm_to_product_point(const Gmm<Scalar>& model) {
  const int k = model.size();
  SphereVector<Scalar> s(k);
  Points3<Scalar> means(3, k);
  std::vector<Mat3<Scalar>> covs;
  covs.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    s(j) = std::sqrt(model[j].weight());
    means.col(j) = model[j].mean();
    covs.push_back(model[j].covariance());
  }
  s /= s.norm();
  return ProductPoint<Scalar>(std::move(s), std::move(means), std::move(covs));
}

/// w_j = s_j², renormalized to sum to one. Zero-weight components are kept.
template <typename Scalar>
Gmm<Scalar> product_point_to_gmm(const ProductPoint<Scalar>& p) {
  const SphereVector<Scalar> w = p.sqrt_weights().array().square().matrix();
  const Scalar total = w.sum();
  std::vector<GaussianComponent<Scalar>> comps;
  comps.reserve(static_cast<std::size_t>(p.size()));
  for (int j = 0; j < p.size(); ++j) {
    comps.emplace_back(w(j) / total, p.means().col(j), p.covariances()[static_cast<std::size_t>(j)]);
  }
  return Gmm<Scalar>(std::move(comps));
}

// ---------------------------------------------------------------------------
// Moment-preserving reduction

template <typename Scalar>
GaussianComponent<Scalar> merge_components(const GaussianComponent<Scalar>& a, const GaussianComponent<Scalar>& b) {
  const Scalar w = a.weight() + b.weight();
  const Scalar fa = w > Scalar(0) ? a.weight() / w : Scalar(0.5);
  const Scalar fb = w > Scalar(0) ? b.weight() / w : Scalar(0.5);
  const Vec3<Scalar> d = a.mean() - b.mean();
  const Vec3<Scalar> mean = fa * a.mean() + fb * b.mean();
  Mat3<Scalar> cov = fa * a.covariance() + fb * b.covariance() + (fa * fb) * d * d.transpose();
  cov = Scalar(0.5) * (cov + cov.transpose());
  return GaussianComponent<Scalar>(w, mean, cov);
}

/// Trace of the within-component scatter added by merging a and b:
/// w_a w_b / (w_a + w_b) ‖μ_a − μ_b‖².
template <typename Scalar>
Scalar merge_cost(const GaussianComponent<Scalar>& a, const GaussianComponent<Scalar>& b) {
  const Scalar w = a.weight() + b.weight();
  if (!(w > Scalar(0))) return Scalar(0);
  return a.weight() * b.weight() / w * (a.mean() - b.mean()).squaredNorm();
}

/// Reduces a mixture to `k_target` components by repeatedly merging the
/// cheapest pair (first pair in index order on ties). Total weight, mean and
/// covariance of the mixture are preserved.
template <typename Scalar>
Gmm<Scalar> project_to_k(const Gmm<Scalar>& model, int k_target) {
  if (k_target < 1) throw InvalidArgument("projection target must have at least one component");
  if (k_target > model.size()) throw InvalidArgument("projection target exceeds the component count");

  std::vector<GaussianComponent<Scalar>> comps = model.components();
  while (static_cast<int>(comps.size()) > k_target) {
    std::size_t bi = 0, bj = 1;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < comps.size(); ++i) {
      for (std::size_t j = i + 1; j < comps.size(); ++j) {
        const Scalar c = merge_cost(comps[i], comps[j]);
        if (c < best) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    }
    comps[bi] = merge_components(comps[bi], comps[bj]);
    comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return Gmm<Scalar>(std::move(comps));
}

// ---------------------------------------------------------------------------
// Component correspondence

/// Optimal assignment for a square cost matrix (Hungarian method, O(n³)).
/// Returns col[i], the column assigned to row i.
template <typename Scalar>
std::vector<int> hungarian_assignment(const DynMatrix<Scalar>& cost) {
  const int n = static_cast<int>(cost.rows());
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<Scalar> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
  std::vector<int> col(n);
  for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

inline constexpr int kExhaustiveMatchLimit = 8;

/// Permutation π minimizing Σ_j ‖μ^a_j − μ^b_π(j)‖². Exhaustive for K <= 8
/// (lexicographically first optimum), Hungarian above.
template <typename Scalar>
std::vector<int> match_components(const Gmm<Scalar>& a, const Gmm<Scalar>& b) {
  if (a.size() != b.size()) throw InvalidArgument("component matching needs equal K");
  const int k = a.size();
  DynMatrix<Scalar> cost(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) cost(i, j) = (a[i].mean() - b[j].mean()).squaredNorm();
  }
  if (k > kExhaustiveMatchLimit) return hungarian_assignment(cost);

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  do {
    Scalar c = 0;
    for (int i = 0; i < k; ++i) c += cost(i, perm[i]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// b's components in the order given by `perm` (component i of the result is b[perm[i]]).
template <typename Scalar>
Gmm<Scalar> reorder_components(const Gmm<Scalar>& b, const std::vector<int>& perm) {
  std::vector<GaussianComponent<Scalar>> comps;
  comps.reserve(perm.size());
  for (int idx : perm) comps.push_back(b[idx]);
  return Gmm<Scalar>(std::move(comps));
}

// ---------------------------------------------------------------------------
// Geodesics

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sphere_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  return std::acos(std::clamp(a.dot(b), Scalar(-1), Scalar(1)));
}

inline constexpr double kSlerpLinearThreshold = 1e-8;

/// Great-circle path (sin((1−t)θ) w1 + sin(tθ) w2) / sin θ, θ = arccos(w1·w2).
template <typename DerivedA, typename DerivedB>
SphereVector<typename DerivedA::Scalar> sphere_geodesic(const Eigen::MatrixBase<DerivedA>& w1,
                                                        const Eigen::MatrixBase<DerivedB>& w2,
                                                        typename DerivedA::Scalar t) {
  using Scalar = typename DerivedA::Scalar;
  if (w1.size() != w2.size()) throw InvalidArgument("sphere geodesic endpoints differ in dimension");
  if (t == Scalar(0)) return w1;
  if (t == Scalar(1)) return w2;
  const Scalar theta = sphere_distance(w1, w2);
  if (theta < Scalar(kSlerpLinearThreshold)) {
    SphereVector<Scalar> v = (Scalar(1) - t) * w1 + t * w2;
    return v / v.norm();
  }
  return (std::sin((Scalar(1) - t) * theta) * w1 + std::sin(t * theta) * w2) / std::sin(theta);
}

/// Affine-invariant geodesic S1^(1/2) (S1^(−1/2) S2 S1^(−1/2))^t S1^(1/2).
/// When floor > 0 the eigenvalues of both endpoints are clamped at it first.
template <typename DerivedA, typename DerivedB>
Mat3<typename DerivedA::Scalar> spd_geodesic(const Eigen::MatrixBase<DerivedA>& s1,
                                             const Eigen::MatrixBase<DerivedB>& s2, typename DerivedA::Scalar t,
                                             typename DerivedA::Scalar floor = 0) {
  using Scalar = typename DerivedA::Scalar;
  Mat3<Scalar> a = s1;
  Mat3<Scalar> b = s2;
  if (floor > Scalar(0)) {
    a = floor_eigenvalues(a, floor);
    b = floor_eigenvalues(b, floor);
  }
  require_spd(a, "geodesic start");
  require_spd(b, "geodesic end");

  const Mat3<Scalar> root = spd_power(a, Scalar(0.5));
  const Mat3<Scalar> inv_root = spd_power(a, Scalar(-0.5));
  Mat3<Scalar> inner = inv_root * b * inv_root;
  inner = Scalar(0.5) * (inner + inner.transpose());
  Mat3<Scalar> out = root * spd_power(inner, t) * root;
  return Scalar(0.5) * (out + out.transpose());
}

/// Slot-wise geodesic: slerp on weights, linear on means, affine-invariant
/// on each covariance. Components must already be matched.
template <typename Scalar>
ProductPoint<Scalar> product_geodesic(const ProductPoint<Scalar>& p1, const ProductPoint<Scalar>& p2, Scalar t,
                                      Scalar floor = 0) {
  if (p1.size() != p2.size()) throw InvalidArgument("product geodesic endpoints have different K");
  SphereVector<Scalar> s = sphere_geodesic(p1.sqrt_weights(), p2.sqrt_weights(), t);
  s = s.cwiseMax(Scalar(0));
  Points3<Scalar> means = (Scalar(1) - t) * p1.means() + t * p2.means();
  std::vector<Mat3<Scalar>> covs;
  covs.reserve(static_cast<std::size_t>(p1.size()));
  for (std::size_t j = 0; j < p1.covariances().size(); ++j) {
    covs.push_back(spd_geodesic(p1.covariances()[j], p2.covariances()[j], t, floor));
  }
  return ProductPoint<Scalar>(std::move(s), std::move(means), std::move(covs));
}

}  // namespace gmmshape
