#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gmmshape/model.hpp"
#include "gmmshape/rng.hpp"

namespace gmmshape {

/// Cumulative table for inverse-CDF categorical draws.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> probs) {
    if (probs.empty()) throw InvalidArgument("categorical distribution needs at least one outcome");
    cumulative_.reserve(probs.size());
    double acc = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("categorical probabilities must be finite and nonnegative");
      acc += p;
      cumulative_.push_back(acc);
    }
    if (std::abs(acc - 1.0) > 1e-9) {
      throw InvalidArgument("categorical probabilities sum to " + std::to_string(acc) + ", expected 1");
    }
    for (std::size_t j = probs.size(); j-- > 0;) {
      if (probs[j] > 0.0) {
        last_positive_ = j;
        break;
      }
    }
  }

  std::size_t draw(RngStream& rng) const {
    const double u = rng.uniform();
    for (std::size_t j = 0; j < cumulative_.size(); ++j) {
      if (u < cumulative_[j]) return j;
    }
    return last_positive_;  // u landed in the rounding gap above the final sum
  }

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

inline std::size_t sample_categorical(std::span<const double> probs, RngStream& rng) {
  return CategoricalTable(probs).draw(rng);
}

/// μ + L z with L the Cholesky factor of Σ and z standard normal.
template <typename Scalar>
Vec3<Scalar> sample_gaussian(const GaussianComponent<Scalar>& c, RngStream& rng) {
  Vec3<Scalar> z;
  for (int d = 0; d < 3; ++d) z(d) = static_cast<Scalar>(rng.normal());
  return c.mean() + c.cholesky().template triangularView<Eigen::Lower>() * z;
}

/// Hierarchical draw: member k ~ {p_k}, component j ~ {w^k_j}, x ~ N(μ^k_j, Σ^k_j).
template <typename Scalar>
class EnsembleSampler {
 public:
  explicit EnsembleSampler(const GmmEnsemble<Scalar>& ensemble)
      : ensemble_(ensemble), members_(member_probs(ensemble)) {
    for (const auto& m : ensemble.members()) {
      std::vector<double> w;
      for (const auto& c : m.model) w.push_back(static_cast<double>(c.weight()));
      components_.emplace_back(w);
    }
  }

  std::pair<std::size_t, std::size_t> draw_indices(RngStream& rng) const {
    const std::size_t k = members_.draw(rng);
    const std::size_t j = components_[k].draw(rng);
    return {k, j};
  }

  Vec3<Scalar> draw(RngStream& rng) const {
    const auto [k, j] = draw_indices(rng);
    return sample_gaussian(ensemble_.members()[k].model[static_cast<int>(j)], rng);
  }

 private:
  static CategoricalTable member_probs(const GmmEnsemble<Scalar>& e) {
    std::vector<double> p;
    for (const auto& m : e.members()) p.push_back(static_cast<double>(m.p));
    return CategoricalTable(p);
  }

  const GmmEnsemble<Scalar>& ensemble_;
  CategoricalTable members_;
  std::vector<CategoricalTable> components_;
};

template <typename Scalar>
PointCloud<Scalar> generate_point_cloud(const GmmEnsemble<Scalar>& ensemble, Eigen::Index n, RngStream& rng,
                                        std::optional<std::string> label = std::nullopt) {
  if (n < 1) throw InvalidArgument("generated point cloud needs at least one point");
  const EnsembleSampler<Scalar> sampler(ensemble);
  Points3<Scalar> pts(3, n);
  for (Eigen::Index i = 0; i < n; ++i) pts.col(i) = sampler.draw(rng);
  return PointCloud<Scalar>(std::move(pts), std::move(label));
}

template <typename Scalar>
PointCloud<Scalar> generate_point_cloud(const Gmm<Scalar>& model, Eigen::Index n, RngStream& rng,
                                        std::optional<std::string> label = std::nullopt) {
  return generate_point_cloud(GmmEnsemble<Scalar>::single(model), n, rng, std::move(label));
}

}  // namespace gmmshape
