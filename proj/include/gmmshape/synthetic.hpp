#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "gmmshape/embedding.hpp"
#include "gmmshape/model.hpp"
#include "gmmshape/rng.hpp"

namespace gmmshape {

inline const std::string kDementedLabel = "demented";
inline const std::string kNondementedLabel = "nondemented";

/// A circular arc of radius `arc_radius` in the xy-plane, symmetric about
/// the y-axis, thickened into a tube.
struct TubeSpec {
  double arc_radius = 10.0;
  double bend_angle = 0.8 * std::numbers::pi;
  double tube_radius = 1.0;
  double noise_sigma = 0.15;
  long n_points = 1000;
  std::string class_label = kNondementedLabel;

  void validate() const {
    if (n_points < 1) throw InvalidArgument("tube needs at least one point");
    if (!(arc_radius > 0)) throw InvalidArgument("arc radius must be positive");
    if (!(tube_radius >= 0 && tube_radius < arc_radius)) throw InvalidArgument("tube radius must be in [0, arc radius)");
    if (!(noise_sigma >= 0)) throw InvalidArgument("noise sigma must be nonnegative");
  }
};

inline TubeSpec nondemented_tube(long n_points = 1000) {
  return {10.0, 0.8 * std::numbers::pi, 1.0, 0.15, n_points, kNondementedLabel};
}

inline TubeSpec demented_tube(long n_points = 1000) {
  return {10.0, 0.6 * std::numbers::pi, 1.3, 0.15, n_points, kDementedLabel};
}

inline TubeSpec tube_for_label(const std::string& label, long n_points = 1000) {
  if (label == kDementedLabel) return demented_tube(n_points);
  if (label == kNondementedLabel) return nondemented_tube(n_points);
  throw InvalidArgument("unknown class '" + label + "' (expected demented or nondemented)");
}

/// Points on the arc at angle φ ∈ [−bend/2, bend/2], displaced uniformly
/// within a disk of radius tube_radius in the normal plane, plus isotropic
/// Gaussian jitter.
template <typename Scalar = double>
PointCloud<Scalar> make_bent_tube(const TubeSpec& spec, std::uint64_t seed) {
  spec.validate();
  RngStream rng(seed);
  Points3<Scalar> pts(3, spec.n_points);
  for (long i = 0; i < spec.n_points; ++i) {
    const double phi = spec.bend_angle * (rng.uniform() - 0.5);
    const Eigen::Vector3d radial(std::sin(phi), std::cos(phi), 0.0);
    const Eigen::Vector3d binormal(0.0, 0.0, 1.0);
    const double r = spec.tube_radius * std::sqrt(rng.uniform());
    const double alpha = 2.0 * std::numbers::pi * rng.uniform();
    Eigen::Vector3d p = spec.arc_radius * radial + r * (std::cos(alpha) * radial + std::sin(alpha) * binormal);
    if (spec.noise_sigma > 0) {
      for (int d = 0; d < 3; ++d) p(d) += spec.noise_sigma * rng.normal();
    }
    pts.col(i) = p.cast<Scalar>();
  }
  return PointCloud<Scalar>(std::move(pts), spec.class_label);
}

/// Replaces floor(fraction · N) distinct, randomly chosen points with
/// uniform draws from `bounds`.
template <typename Scalar>
PointCloud<Scalar> add_outliers(const PointCloud<Scalar>& cloud, double fraction, const Box<Scalar>& bounds,
                                std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("outlier fraction must be in [0, 1)");
  const Eigen::Index n = cloud.size();
  const auto count = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n)));
  Points3<Scalar> pts = cloud.points();
  if (count == 0) return PointCloud<Scalar>(std::move(pts), cloud.label());

  RngStream rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates: the first `count` slots become the chosen indices.
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    auto col = pts.col(idx[static_cast<std::size_t>(i)]);
    for (int d = 0; d < 3; ++d) {
      col(d) = static_cast<Scalar>(rng.uniform(static_cast<double>(bounds.lo(d)), static_cast<double>(bounds.hi(d))));
    }
  }
  return PointCloud<Scalar>(std::move(pts), cloud.label());
}

}  // namespace gmmshape
