#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gmmshape/model.hpp"
#include "gmmshape/rng.hpp"

namespace gmmshape {

template <typename Scalar>
struct Box {
  Vec3<Scalar> lo;
  Vec3<Scalar> hi;

  bool contains(const Vec3<Scalar>& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

/// Axis-aligned bounding box of all points, grown by `margin` of the extent
/// on each side (the default grows each axis by 10% overall). A zero-extent
/// axis is widened by one unit per side.
template <typename Scalar>
Box<Scalar> bounding_box(const std::vector<PointCloud<Scalar>>& clouds, Scalar margin = Scalar(0.05)) {
  if (clouds.empty()) throw InvalidArgument("bounding box needs at least one cloud");
  Vec3<Scalar> lo = Vec3<Scalar>::Constant(std::numeric_limits<Scalar>::infinity());
  Vec3<Scalar> hi = -lo;
  for (const auto& c : clouds) {
    lo = lo.cwiseMin(c.points().rowwise().minCoeff());
    hi = hi.cwiseMax(c.points().rowwise().maxCoeff());
  }
  for (int d = 0; d < 3; ++d) {
    const Scalar extent = hi(d) - lo(d);
    if (extent > Scalar(0)) {
      lo(d) -= margin * extent;
      hi(d) += margin * extent;
    } else {
      lo(d) -= Scalar(1);
      hi(d) += Scalar(1);
    }
  }
  return {lo, hi};
}

inline constexpr int kDefaultProbeCount = 1000;

/// Fixed probe locations shared by every embedding that will be compared.
template <typename Scalar>
struct ProbeSet {
  Points3<Scalar> probes;
  Box<Scalar> bounds;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return probes.cols(); }
};

template <typename Scalar>
ProbeSet<Scalar> make_probe_set(const Box<Scalar>& bounds, std::uint64_t seed, int count = kDefaultProbeCount) {
  if (count < 1) throw InvalidArgument("probe count must be positive");
  RngStream rng(seed);
  Points3<Scalar> probes(3, count);
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < 3; ++d) {
      probes(d, i) = static_cast<Scalar>(rng.uniform(static_cast<double>(bounds.lo(d)), static_cast<double>(bounds.hi(d))));
    }
  }
  return {std::move(probes), bounds, seed};
}

/// Probes uniform in the inflated joint bounding box of `clouds`.
template <typename Scalar>
ProbeSet<Scalar> make_probe_set(const std::vector<PointCloud<Scalar>>& clouds, std::uint64_t seed,
                                int count = kDefaultProbeCount) {
  return make_probe_set(bounding_box(clouds), seed, count);
}

/// Unit vector √(p / Σp) on the probe sphere.
template <typename Scalar>
struct SphereEmbedding {
  DynVector<Scalar> coords;
  std::string name;
  std::optional<std::string> label;
};

/// Square-root embedding from log densities; normalization happens after
/// subtracting the maximum so underflow in the linear domain is harmless.
template <typename Scalar>
SphereEmbedding<Scalar> embed_log_densities(const DynVector<Scalar>& log_density) {
  const Scalar hi = log_density.maxCoeff();
  if (!std::isfinite(static_cast<double>(hi))) {
    throw Error("probe set does not cover the model support");
  }
  DynVector<Scalar> q = (log_density.array() - hi).exp().matrix();
  q /= q.sum();
  SphereEmbedding<Scalar> out;
  out.coords = q.cwiseSqrt();
  out.coords /= out.coords.norm();
  return out;
}

template <typename Scalar>
SphereEmbedding<Scalar> embed(const Gmm<Scalar>& model, const ProbeSet<Scalar>& probes) {
  return embed_log_densities<Scalar>(gmm_log_density(probes.probes, model));
}

template <typename Scalar>
SphereEmbedding<Scalar> embed(const GmmEnsemble<Scalar>& ensemble, const ProbeSet<Scalar>& probes) {
  return embed_log_densities<Scalar>(ensemble_log_density(probes.probes, ensemble));
}

/// arccos(⟨a, b⟩), inner product clamped to [−1, 1].
template <typename Scalar>
Scalar arc_distance(const SphereEmbedding<Scalar>& a, const SphereEmbedding<Scalar>& b) {
  if (a.coords.size() != b.coords.size()) throw InvalidArgument("embeddings differ in dimension");
  return std::acos(std::clamp(a.coords.dot(b.coords), Scalar(-1), Scalar(1)));
}

template <typename Scalar>
struct LabeledEmbedding {
  SphereEmbedding<Scalar> embedding;
  std::string label;
};

/// Index of the nearest training embedding; ties go to the earliest.
template <typename Scalar>
std::size_t nearest_neighbor(const std::vector<LabeledEmbedding<Scalar>>& train, const SphereEmbedding<Scalar>& query) {
  if (train.empty()) throw InvalidArgument("1-NN needs at least one training embedding");
  std::size_t best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Scalar d = arc_distance(train[i].embedding, query);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

template <typename Scalar>
std::string knn_classify(const std::vector<LabeledEmbedding<Scalar>>& train, const SphereEmbedding<Scalar>& query) {
  return train[nearest_neighbor(train, query)].label;
}

struct Prediction {
  std::string truth;
  std::string predicted;
};

/// Binary metrics with an explicitly named positive class. Sensitivity or
/// specificity is NaN when its denominator is empty.
struct ClassificationMetrics {
  double accuracy = 0;
  double sensitivity = 0;
  double specificity = 0;
  int true_positive = 0;
  int false_negative = 0;
  int true_negative = 0;
  int false_positive = 0;
  std::string positive_label;
};

inline ClassificationMetrics evaluate(const std::vector<Prediction>& predictions, const std::string& positive_label) {
  if (predictions.empty()) throw InvalidArgument("cannot evaluate an empty prediction list");
  ClassificationMetrics m;
  m.positive_label = positive_label;
  for (const auto& p : predictions) {
    const bool truth_pos = p.truth == positive_label;
    const bool pred_pos = p.predicted == positive_label;
    if (truth_pos && pred_pos) ++m.true_positive;
    if (truth_pos && !pred_pos) ++m.false_negative;
    if (!truth_pos && !pred_pos) ++m.true_negative;
    if (!truth_pos && pred_pos) ++m.false_positive;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int correct = m.true_positive + m.true_negative;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  const int pos = m.true_positive + m.false_negative;
  const int neg = m.true_negative + m.false_positive;
  m.sensitivity = pos > 0 ? static_cast<double>(m.true_positive) / pos : nan;
  m.specificity = neg > 0 ? static_cast<double>(m.true_negative) / neg : nan;
  return m;
}

}  // namespace gmmshape
