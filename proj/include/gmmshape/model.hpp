#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gmmshape/errors.hpp"
#include "gmmshape/spd.hpp"

namespace gmmshape {

template <typename Scalar>
using Points3 = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

template <typename Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DynVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A finite, nonempty set of 3D points stored column-wise, with an optional
/// class tag.
template <typename Scalar>
class PointCloud {
 public:
  explicit PointCloud(Points3<Scalar> points, std::optional<std::string> label = std::nullopt)
      : points_(std::move(points)), label_(std::move(label)) {
    if (points_.cols() < 1) throw InvalidArgument("point cloud must contain at least one point");
    if (!points_.allFinite()) throw InvalidArgument("point cloud contains non-finite coordinates");
  }

  static PointCloud from_points(const std::vector<Vec3<Scalar>>& pts, std::optional<std::string> label = std::nullopt) {
    Points3<Scalar> m(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
    return PointCloud(std::move(m), std::move(label));
  }

  Eigen::Index size() const { return points_.cols(); }
  const Points3<Scalar>& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }
  const std::optional<std::string>& label() const { return label_; }

  PointCloud with_label(std::optional<std::string> label) const { return PointCloud(points_, std::move(label)); }

 private:
  Points3<Scalar> points_;
  std::optional<std::string> label_;
};

template <typename Scalar>
Vec3<Scalar> sample_mean(const Points3<Scalar>& pts) {
  return pts.rowwise().mean();
}

/// Maximum-likelihood (divide-by-N) sample covariance.
template <typename Scalar>
Mat3<Scalar> sample_covariance(const Points3<Scalar>& pts) {
  const Points3<Scalar> centered = pts.colwise() - sample_mean(pts);
  Mat3<Scalar> cov = centered * centered.transpose() / static_cast<Scalar>(pts.cols());
  return Scalar(0.5) * (cov + cov.transpose());
}

/// Scale-aware eigenvalue floor: 1e-6 times the mean per-axis variance of
/// the data. Falls back to 1e-6 when the data has zero spread.
template <typename Scalar>
Scalar covariance_floor(const PointCloud<Scalar>& cloud) {
  const Scalar mean_var = sample_covariance(cloud.points()).trace() / Scalar(3);
  return Scalar(1e-6) * (mean_var > Scalar(0) ? mean_var : Scalar(1));
}

inline constexpr double kSymmetryTolerance = 1e-12;

/// One weighted 3D Gaussian. The covariance is validated as SPD and stored
/// with its Cholesky factor; instances are immutable.
template <typename Scalar>
class GaussianComponent {
 public:
  GaussianComponent(Scalar weight, Vec3<Scalar> mean, const Mat3<Scalar>& covariance)
      : weight_(weight), mean_(std::move(mean)) {
    if (!(weight_ >= Scalar(0)) || !std::isfinite(static_cast<double>(weight_))) {
      throw InvalidArgument("component weight must be finite and nonnegative");
    }
    if (!mean_.allFinite()) throw InvalidArgument("component mean must be finite");
    if (!covariance.allFinite()) {
      throw DegenerateCovariance("covariance has non-finite entries", std::numeric_limits<double>::quiet_NaN());
    }
    const Scalar asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(kSymmetryTolerance)) {
      throw InvalidArgument("covariance asymmetry " + std::to_string(static_cast<double>(asym)) +
                            " exceeds tolerance");
    }
    covariance_ = Scalar(0.5) * (covariance + covariance.transpose());
    require_spd(covariance_, "covariance");
    cholesky_ = covariance_.llt().matrixL();
    const Scalar log_det = Scalar(2) * cholesky_.diagonal().array().log().sum();
    log_normalizer_ = -Scalar(1.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) - Scalar(0.5) * log_det;
  }

  Scalar weight() const { return weight_; }
  const Vec3<Scalar>& mean() const { return mean_; }
  const Mat3<Scalar>& covariance() const { return covariance_; }
  /// Lower-triangular L with LLᵀ = Σ.
  const Mat3<Scalar>& cholesky() const { return cholesky_; }
  /// log of (2π)^(-3/2) det(Σ)^(-1/2).
  Scalar log_normalizer() const { return log_normalizer_; }

  template <typename Derived>
  Scalar mahalanobis_squared(const Eigen::MatrixBase<Derived>& x) const {
    const Vec3<Scalar> z = cholesky_.template triangularView<Eigen::Lower>().solve(Vec3<Scalar>(x - mean_));
    return z.squaredNorm();
  }

  GaussianComponent with_weight(Scalar w) const { return GaussianComponent(w, mean_, covariance_); }

 private:
  Scalar weight_;
  Vec3<Scalar> mean_;
  Mat3<Scalar> covariance_;
  Mat3<Scalar> cholesky_;
  Scalar log_normalizer_{};
};

inline constexpr double kWeightSumTolerance = 1e-9;

/// A mixture of K >= 1 Gaussian components whose weights sum to one.
template <typename Scalar>
class Gmm {
 public:
  explicit Gmm(std::vector<GaussianComponent<Scalar>> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("a mixture needs at least one component");
    Scalar total = 0;
    for (const auto& c : components_) total += c.weight();
    if (std::abs(total - Scalar(1)) > Scalar(kWeightSumTolerance)) {
      throw InvalidArgument("mixture weights sum to " + std::to_string(static_cast<double>(total)) + ", expected 1");
    }
  }

  int size() const { return static_cast<int>(components_.size()); }
  const GaussianComponent<Scalar>& operator[](int j) const { return components_[static_cast<std::size_t>(j)]; }
  const std::vector<GaussianComponent<Scalar>>& components() const { return components_; }

  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  std::vector<Scalar> weights() const {
    std::vector<Scalar> w;
    w.reserve(components_.size());
    for (const auto& c : components_) w.push_back(c.weight());
    return w;
  }

 private:
  std::vector<GaussianComponent<Scalar>> components_;
};

/// Overall mean of a mixture.
template <typename Scalar>
Vec3<Scalar> mixture_mean(const Gmm<Scalar>& model) {
  Vec3<Scalar> m = Vec3<Scalar>::Zero();
  for (const auto& c : model) m += c.weight() * c.mean();
  return m;
}

/// Overall covariance of a mixture: Σ w (Σ_j + μ_j μ_jᵀ) − μ μᵀ, evaluated
/// around the mixture mean for accuracy.
template <typename Scalar>
Mat3<Scalar> mixture_covariance(const Gmm<Scalar>& model) {
  const Vec3<Scalar> m = mixture_mean(model);
  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (const auto& c : model) {
    const Vec3<Scalar> d = c.mean() - m;
    cov += c.weight() * (c.covariance() + d * d.transpose());
  }
  return cov;
}

template <typename Scalar>
struct EnsembleMember {
  Scalar p;
  Gmm<Scalar> model;
};

/// The Akaike-weighted mixture of mixtures: Σ_k p_k N^k.
template <typename Scalar>
class GmmEnsemble {
 public:
  explicit GmmEnsemble(std::vector<EnsembleMember<Scalar>> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidArgument("an ensemble needs at least one member");
    Scalar total = 0;
    std::set<int> ks;
    for (const auto& m : members_) {
      if (!(m.p > Scalar(0))) throw InvalidArgument("ensemble member probabilities must be positive");
      if (!ks.insert(m.model.size()).second) {
        throw InvalidArgument("ensemble members must have distinct component counts");
      }
      total += m.p;
    }
    if (std::abs(total - Scalar(1)) > Scalar(kWeightSumTolerance)) {
      throw InvalidArgument("ensemble probabilities do not sum to 1");
    }
  }

  static GmmEnsemble single(Gmm<Scalar> model) { return GmmEnsemble({EnsembleMember<Scalar>{Scalar(1), std::move(model)}}); }

  const std::vector<EnsembleMember<Scalar>>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }

  /// Member with the largest p; ties go to the smaller component count.
  const EnsembleMember<Scalar>& dominant() const {
    const EnsembleMember<Scalar>* best = &members_.front();
    for (const auto& m : members_) {
      if (m.p > best->p || (m.p == best->p && m.model.size() < best->model.size())) best = &m;
    }
    return *best;
  }

 private:
  std::vector<EnsembleMember<Scalar>> members_;
};

// ---------------------------------------------------------------------------
// Densities

template <typename Scalar, typename Derived>
Scalar log_gaussian_density(const Eigen::MatrixBase<Derived>& x, const GaussianComponent<Scalar>& c) {
  return c.log_normalizer() - Scalar(0.5) * c.mahalanobis_squared(x);
}

/// (2π)^(-3/2) det(Σ)^(-1/2) exp(-½ (x-μ)ᵀ Σ⁻¹ (x-μ)).
template <typename Scalar, typename Derived>
Scalar gaussian_density(const Eigen::MatrixBase<Derived>& x, const GaussianComponent<Scalar>& c) {
  return std::exp(log_gaussian_density(x, c));
}

template <typename Scalar, typename Derived>
Scalar gmm_density(const Eigen::MatrixBase<Derived>& x, const Gmm<Scalar>& model) {
  Scalar total = 0;
  for (const auto& c : model) total += c.weight() * gaussian_density(x, c);
  return total;
}

template <typename Scalar>
Scalar log_sum_exp(std::span<const Scalar> terms) {
  Scalar hi = -std::numeric_limits<Scalar>::infinity();
  for (Scalar t : terms) hi = std::max(hi, t);
  if (!std::isfinite(static_cast<double>(hi))) return hi;
  Scalar acc = 0;
  for (Scalar t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

/// Per-component log(w_j f_j(x_i)) for every point, as an N×K matrix.
/// Zero-weight components contribute -inf.
template <typename Scalar>
DynMatrix<Scalar> weighted_log_densities(const Points3<Scalar>& pts,
                                                                             const Gmm<Scalar>& model) {
  const Eigen::Index n = pts.cols();
  DynMatrix<Scalar> out(n, model.size());
  for (int j = 0; j < model.size(); ++j) {
    const auto& c = model[j];
    const Scalar log_w = c.weight() > Scalar(0) ? std::log(c.weight()) : -std::numeric_limits<Scalar>::infinity();
    const Points3<Scalar> z = c.cholesky().template triangularView<Eigen::Lower>().solve(pts.colwise() - c.mean());
    out.col(j) = (log_w + c.log_normalizer() - Scalar(0.5) * z.colwise().squaredNorm().array()).transpose();
  }
  return out;
}

template <typename Scalar>
Scalar log_sum_exp_row(const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& row) {
  const Scalar hi = row.maxCoeff();
  if (!std::isfinite(static_cast<double>(hi))) return hi;
  return hi + std::log((row.array() - hi).exp().sum());
}

/// log of the mixture density at every point, log-sum-exp stabilized.
template <typename Scalar>
DynVector<Scalar> gmm_log_density(const Points3<Scalar>& pts, const Gmm<Scalar>& model) {
  const auto terms = weighted_log_densities(pts, model);
  DynVector<Scalar> out(terms.rows());
  for (Eigen::Index i = 0; i < terms.rows(); ++i) out(i) = log_sum_exp_row<Scalar>(terms.row(i));
  return out;
}

template <typename Scalar, typename Derived>
Scalar gmm_log_density(const Eigen::MatrixBase<Derived>& x, const Gmm<Scalar>& model) {
  return gmm_log_density(Points3<Scalar>(x), model)(0);
}

/// Σ_i log p(x_i) under an ensemble: log Σ_k p_k N^k(x).
template <typename Scalar>
DynVector<Scalar> ensemble_log_density(const Points3<Scalar>& pts,
                                                              const GmmEnsemble<Scalar>& ensemble) {
  const Eigen::Index n = pts.cols();
  DynMatrix<Scalar> terms(n, ensemble.size());
  for (int k = 0; k < ensemble.size(); ++k) {
    const auto& m = ensemble.members()[static_cast<std::size_t>(k)];
    terms.col(k) = gmm_log_density(pts, m.model).array() + std::log(m.p);
  }
  DynVector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = log_sum_exp_row<Scalar>(terms.row(i));
  return out;
}

template <typename Scalar>
Scalar gmm_log_likelihood(const PointCloud<Scalar>& cloud, const Gmm<Scalar>& model) {
  return gmm_log_density(cloud.points(), model).sum();
}

}  // namespace gmmshape
