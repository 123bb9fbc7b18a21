#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "gmmshape/model.hpp"
#include "gmmshape/rng.hpp"

namespace gmmshape {

template <typename Scalar>
struct KMeansResult {
  std::vector<int> assignment;  // per point, in the order of the points passed in
  Points3<Scalar> centroids;
  Scalar inertia = 0;  // within-cluster sum of squares
};

namespace detail {

/// Copy of the points sorted lexicographically by (x, y, z).
template <typename Scalar>
Points3<Scalar> lexicographic_sort(const Points3<Scalar>& pts) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pts.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (int d = 0; d < 3; ++d) {
      if (pts(d, a) != pts(d, b)) return pts(d, a) < pts(d, b);
    }
    return false;
  });
  Points3<Scalar> out(3, pts.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts.col(order[i]);
  return out;
}

template <typename Scalar>
Points3<Scalar> kmeanspp_seed(const Points3<Scalar>& pts, int k, RngStream& rng) {
  const Eigen::Index n = pts.cols();
  Points3<Scalar> centers(3, k);
  std::vector<Scalar> mindist(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    if (c > 0) {
      Scalar total = 0;
      for (Eigen::Index i = 0; i < n; ++i) total += mindist[static_cast<std::size_t>(i)];
      if (total > Scalar(0)) {
        const Scalar target = static_cast<Scalar>(rng.uniform()) * total;
        Scalar acc = 0;
        pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Scalar d = mindist[static_cast<std::size_t>(i)];
          if (d <= Scalar(0)) continue;
          acc += d;
          pick = i;
          if (target < acc) break;
        }
      } else {
        // Every point coincides with a center; take any point not yet used.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
        }
        pick = free.empty() ? static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))
                            : free[rng.below(free.size())];
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centers.col(c) = pts.col(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = (pts.col(i) - centers.col(c)).squaredNorm();
      auto& md = mindist[static_cast<std::size_t>(i)];
      md = std::min(md, d);
    }
  }
  return centers;
}

template <typename Scalar>
void recompute_centroids(const Points3<Scalar>& pts, const std::vector<int>& assignment, Points3<Scalar>& centroids,
                         std::vector<Eigen::Index>& sizes) {
  const int k = static_cast<int>(centroids.cols());
  Points3<Scalar> sums = Points3<Scalar>::Zero(3, k);
  sizes.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    sums.col(c) += pts.col(i);
    ++sizes[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) centroids.col(c) = sums.col(c) / static_cast<Scalar>(sizes[static_cast<std::size_t>(c)]);
  }
}

/// Moves the point farthest from its centroid into each empty cluster.
template <typename Scalar>
void repair_empty_clusters(const Points3<Scalar>& pts, std::vector<int>& assignment, Points3<Scalar>& centroids,
                           std::vector<Eigen::Index>& sizes) {
  const int k = static_cast<int>(centroids.cols());
  for (int empty = 0; empty < k; ++empty) {
    if (sizes[static_cast<std::size_t>(empty)] > 0) continue;
    Eigen::Index far = -1;
    Scalar far_d = -1;
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      const int c = assignment[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(c)] < 2) continue;
      const Scalar d = (pts.col(i) - centroids.col(c)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    const int from = assignment[static_cast<std::size_t>(far)];
    assignment[static_cast<std::size_t>(far)] = empty;
    --sizes[static_cast<std::size_t>(from)];
    ++sizes[static_cast<std::size_t>(empty)];
    centroids.col(empty) = pts.col(far);
  }
  recompute_centroids(pts, assignment, centroids, sizes);
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding. Nearest-centroid ties go to the
/// lower cluster index; empty clusters are refilled rather than dropped.
template <typename Scalar>
KMeansResult<Scalar> kmeans_lloyd(const Points3<Scalar>& pts, int k, RngStream& rng, int max_iterations = 300) {
  const Eigen::Index n = pts.cols();
  if (k < 1) throw InvalidArgument("k-means needs at least one cluster");
  if (k > n) throw InvalidArgument("more components than points");

  KMeansResult<Scalar> res;
  res.centroids = detail::kmeanspp_seed(pts, k, rng);
  res.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> sizes;

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      Scalar best_d = std::numeric_limits<Scalar>::infinity();
      for (int c = 0; c < k; ++c) {
        const Scalar d = (pts.col(i) - res.centroids.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& a = res.assignment[static_cast<std::size_t>(i)];
      if (a != best) {
        a = best;
        changed = true;
      }
    }
    detail::recompute_centroids(pts, res.assignment, res.centroids, sizes);
    if (std::any_of(sizes.begin(), sizes.end(), [](Eigen::Index s) { return s == 0; })) {
      detail::repair_empty_clusters(pts, res.assignment, res.centroids, sizes);
      changed = true;
    }
    if (!changed) break;
  }

  res.inertia = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    res.inertia += (pts.col(i) - res.centroids.col(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return res;
}

/// Initial mixture from k-means: cluster centroids as means, per-cluster
/// sample covariances (eigenvalues floored at `floor`) and weights N_j/N.
/// Points are sorted lexicographically before seeding so the result does
/// not depend on input order. The best of `restarts` runs (lowest inertia)
/// is kept.
template <typename Scalar>
Gmm<Scalar> kmeans_init(const PointCloud<Scalar>& cloud, int k, std::uint64_t seed, int restarts, Scalar floor) {
  if (k < 1) throw InvalidArgument("number of components must be at least 1");
  if (k > cloud.size()) throw InvalidArgument("more components than points");
  restarts = std::max(restarts, 1);

  const Points3<Scalar> pts = detail::lexicographic_sort(cloud.points());
  std::optional<KMeansResult<Scalar>> best;
  for (int r = 0; r < restarts; ++r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    auto res = kmeans_lloyd(pts, k, rng);
    if (!best || res.inertia < best->inertia) best = std::move(res);
  }

  const Scalar n = static_cast<Scalar>(pts.cols());
  std::vector<GaussianComponent<Scalar>> comps;
  comps.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      if (best->assignment[static_cast<std::size_t>(i)] == c) members.push_back(i);
    }
    Points3<Scalar> sub(3, static_cast<Eigen::Index>(members.size()));
    for (std::size_t m = 0; m < members.size(); ++m) sub.col(static_cast<Eigen::Index>(m)) = pts.col(members[m]);
    const Vec3<Scalar> mean = sample_mean(sub);
    const Mat3<Scalar> cov = floor_eigenvalues(sample_covariance(sub), floor);
    comps.emplace_back(static_cast<Scalar>(members.size()) / n, mean, cov);
  }
  return Gmm<Scalar>(std::move(comps));
}

template <typename Scalar>
Gmm<Scalar> kmeans_init(const PointCloud<Scalar>& cloud, int k, std::uint64_t seed, int restarts = 4) {
  return kmeans_init(cloud, k, seed, restarts, covariance_floor(cloud));
}

}  // namespace gmmshape
