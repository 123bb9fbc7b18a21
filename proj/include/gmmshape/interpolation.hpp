#pragma once

#include <cstdint>
#include <vector>

#include "gmmshape/geodesic.hpp"
#include "gmmshape/model_selection.hpp"
#include "gmmshape/sampler.hpp"

namespace gmmshape {

struct InterpolationConfig {
  /// Empty means default_candidate_ks(N) per cloud.
  std::vector<int> candidate_ks;
  FitConfig fit;
  /// Frame i is sampled from RngStream(sample_seed, i).
  std::uint64_t sample_seed = 0;
};

inline std::vector<double> default_interpolation_times() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

template <typename Scalar>
struct InterpolationResult {
  int k = 0;
  /// Both endpoint mixtures after projection to K components and matching.
  Gmm<Scalar> start;
  Gmm<Scalar> end;
  std::vector<Scalar> ts;
  std::vector<Gmm<Scalar>> models;
  std::vector<PointCloud<Scalar>> clouds;
};

/// Fits ensembles to both clouds, takes each ensemble's dominant member,
/// projects both to K = min(K1, K2) components, matches components by mean
/// and samples `n_out` points from the product-geodesic mixture at each t.
template <typename Scalar>
InterpolationResult<Scalar> interpolate_point_clouds(const PointCloud<Scalar>& x, const PointCloud<Scalar>& y,
                                                     const std::vector<Scalar>& ts, Eigen::Index n_out,
                                                     const InterpolationConfig& config = {}) {
  for (Scalar t : ts) {
    if (!(t >= Scalar(0) && t <= Scalar(1))) throw InvalidArgument("interpolation times must lie in [0, 1]");
  }
  const auto ks_for = [&](const PointCloud<Scalar>& c) {
    return config.candidate_ks.empty() ? default_candidate_ks(c.size()) : config.candidate_ks;
  };
  const auto fit_x = build_ensemble(x, ks_for(x), config.fit);
  const auto fit_y = build_ensemble(y, ks_for(y), config.fit);
  const Gmm<Scalar>& gx = fit_x.ensemble.dominant().model;
  const Gmm<Scalar>& gy = fit_y.ensemble.dominant().model;

  const int k = std::min(gx.size(), gy.size());
  Gmm<Scalar> start = project_to_k(gx, k);
  Gmm<Scalar> end = project_to_k(gy, k);
  end = reorder_components(end, match_components(start, end));

  const Scalar floor = std::min(covariance_floor(x), covariance_floor(y));
  const auto p1 = gmm_to_product_point(start);
  const auto p2 = gmm_to_product_point(end);

  InterpolationResult<Scalar> out{k, start, end, ts, {}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Gmm<Scalar> frame = product_point_to_gmm(product_geodesic(p1, p2, ts[i], floor));
    RngStream rng(config.sample_seed, static_cast<std::uint64_t>(i));
    out.clouds.push_back(generate_point_cloud(frame, n_out, rng));
    out.models.push_back(std::move(frame));
  }
  return out;
}

}  // namespace gmmshape
