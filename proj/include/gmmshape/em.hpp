#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gmmshape/kmeans.hpp"
#include "gmmshape/model.hpp"

namespace gmmshape {

/// Posterior component memberships γ (N×K, rows sum to one).
template <typename Scalar>
struct Responsibilities {
  DynMatrix<Scalar> gamma;
  /// Points whose every component density underflowed; they received 1/K.
  int underflow_count = 0;
};

struct FitConfig {
  int max_iterations = 200;
  double rel_tolerance = 1e-6;
  std::uint64_t seed = 0;
  int kmeans_restarts = 4;
};

template <typename Scalar>
struct FitResult {
  Gmm<Scalar> model;
  /// Log-likelihood after each M step.
  std::vector<Scalar> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  int underflow_warnings = 0;
  int reseeded_components = 0;
};

namespace detail {

template <typename Scalar>
struct EStepOutput {
  Responsibilities<Scalar> resp;
  Scalar log_likelihood = 0;
};

template <typename Scalar>
EStepOutput<Scalar> e_step_with_likelihood(const Points3<Scalar>& pts, const Gmm<Scalar>& model) {
  const DynMatrix<Scalar> terms = weighted_log_densities(pts, model);
  const Eigen::Index n = terms.rows();
  const Eigen::Index k = terms.cols();

  EStepOutput<Scalar> out;
  out.resp.gamma.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar hi = terms.row(i).maxCoeff();
    if (!std::isfinite(static_cast<double>(hi))) {
      out.resp.gamma.row(i).setConstant(Scalar(1) / static_cast<Scalar>(k));
      ++out.resp.underflow_count;
      out.log_likelihood += hi;
      continue;
    }
    auto row = out.resp.gamma.row(i);
    row = (terms.row(i).array() - hi).exp().matrix();
    const Scalar s = row.sum();
    row /= s;
    out.log_likelihood += hi + std::log(s);
  }
  return out;
}

}  // namespace detail

/// γ_ij = w_j f(x_i|μ_j,Σ_j) / Σ_l w_l f(x_i|μ_l,Σ_l), in log space.
template <typename Scalar>
Responsibilities<Scalar> e_step(const PointCloud<Scalar>& cloud, const Gmm<Scalar>& model) {
  return detail::e_step_with_likelihood(cloud.points(), model).resp;
}

template <typename Scalar>
struct MStepOutput {
  Gmm<Scalar> model;
  int reseeded = 0;
};

/// Weighted-moment update. Every sum runs over all N points. Covariance
/// eigenvalues are floored at `floor`. A component whose responsibility mass
/// falls below 1e-12 is re-seeded at the point of lowest density under the
/// surviving components, with the data covariance and weight 1/N.
template <typename Scalar>
MStepOutput<Scalar> m_step_detailed(const PointCloud<Scalar>& cloud, const Responsibilities<Scalar>& resp,
                                    Scalar floor) {
  const auto& pts = cloud.points();
  const auto& gamma = resp.gamma;
  if (gamma.rows() != pts.cols()) throw InvalidArgument("responsibility rows must match the number of points");
  const Eigen::Index k = gamma.cols();
  if (k < 1) throw InvalidArgument("responsibilities need at least one column");

  const DynVector<Scalar> mass = gamma.colwise().sum().transpose();
  const Scalar total = mass.sum();

  struct Moments {
    Scalar mass;
    Vec3<Scalar> mean;
    Mat3<Scalar> cov;
  };
  std::vector<Moments> moments(static_cast<std::size_t>(k));
  std::vector<int> collapsed;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(mass(j) >= Scalar(1e-12))) {
      collapsed.push_back(static_cast<int>(j));
      continue;
    }
    const Vec3<Scalar> mean = pts * gamma.col(j) / mass(j);
    const Points3<Scalar> centered = pts.colwise() - mean;
    Mat3<Scalar> cov = centered * gamma.col(j).asDiagonal() * centered.transpose() / mass(j);
    cov = Scalar(0.5) * (cov + cov.transpose());
    moments[static_cast<std::size_t>(j)] = {mass(j) / total, mean, floor_eigenvalues(cov, floor)};
  }

  int reseeded = 0;
  if (!collapsed.empty()) {
    const Scalar n = static_cast<Scalar>(pts.cols());
    Eigen::Index lowest = 0;
    if (static_cast<Eigen::Index>(collapsed.size()) < k) {
      std::vector<GaussianComponent<Scalar>> alive;
      Scalar alive_mass = 0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (std::find(collapsed.begin(), collapsed.end(), static_cast<int>(j)) == collapsed.end()) {
          alive_mass += moments[static_cast<std::size_t>(j)].mass;
        }
      }
      for (Eigen::Index j = 0; j < k; ++j) {
        if (std::find(collapsed.begin(), collapsed.end(), static_cast<int>(j)) != collapsed.end()) continue;
        const auto& m = moments[static_cast<std::size_t>(j)];
        alive.emplace_back(m.mass / alive_mass, m.mean, m.cov);
      }
      const DynVector<Scalar> logp = gmm_log_density(pts, Gmm<Scalar>(std::move(alive)));
      logp.minCoeff(&lowest);
    }
    const Mat3<Scalar> data_cov = floor_eigenvalues(sample_covariance(pts), floor);
    for (int j : collapsed) {
      moments[static_cast<std::size_t>(j)] = {Scalar(1) / n, pts.col(lowest), data_cov};
      ++reseeded;
    }
  }

  Scalar wsum = 0;
  for (const auto& m : moments) wsum += m.mass;
  std::vector<GaussianComponent<Scalar>> comps;
  comps.reserve(moments.size());
  for (const auto& m : moments) comps.emplace_back(m.mass / wsum, m.mean, m.cov);
  return {Gmm<Scalar>(std::move(comps)), reseeded};
}

template <typename Scalar>
Gmm<Scalar> m_step(const PointCloud<Scalar>& cloud, const Responsibilities<Scalar>& resp, Scalar floor) {
  return m_step_detailed(cloud, resp, floor).model;
}

template <typename Scalar>
Gmm<Scalar> m_step(const PointCloud<Scalar>& cloud, const Responsibilities<Scalar>& resp) {
  return m_step(cloud, resp, covariance_floor(cloud));
}

/// k-means initialization followed by EM until the relative log-likelihood
/// change |ΔlogL| / (|logL| + 1) drops below config.rel_tolerance.
template <typename Scalar>
FitResult<Scalar> fit_em(const PointCloud<Scalar>& cloud, int k, const FitConfig& config = {}) {
  if (config.max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(config.rel_tolerance > 0)) throw InvalidArgument("rel_tolerance must be positive");

  const Scalar floor = covariance_floor(cloud);
  Gmm<Scalar> model = kmeans_init(cloud, k, config.seed, config.kmeans_restarts, floor);
  auto e = detail::e_step_with_likelihood(cloud.points(), model);

  FitResult<Scalar> result{model, {}, 0, false, e.resp.underflow_count, 0};
  Scalar previous = e.log_likelihood;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    try {
      auto m = m_step_detailed(cloud, e.resp, floor);
      model = std::move(m.model);
      result.reseeded_components += m.reseeded;
    } catch (const Error& err) {
      throw FitError(err.what(), iter);
    }
    e = detail::e_step_with_likelihood(cloud.points(), model);
    if (!std::isfinite(static_cast<double>(e.log_likelihood))) {
      throw FitError("log-likelihood is not finite", iter);
    }
    result.underflow_warnings += e.resp.underflow_count;
    result.log_likelihood_trace.push_back(e.log_likelihood);
    result.iterations = iter;

    const Scalar change = std::abs(e.log_likelihood - previous) / (std::abs(e.log_likelihood) + Scalar(1));
    previous = e.log_likelihood;
    if (change < static_cast<Scalar>(config.rel_tolerance)) {
      result.converged = true;
      break;
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace gmmshape
