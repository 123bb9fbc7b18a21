#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "gmmshape/em.hpp"
#include "gmmshape/model.hpp"

namespace gmmshape {

/// Free parameters of a full-covariance 3D mixture: (K−1) weights, 3K means,
/// 6K covariance entries.
constexpr int aic_parameter_count(int k) { return 10 * k - 1; }

template <typename Scalar>
Scalar aic_from_log_likelihood(int k, Scalar log_likelihood) {
  return Scalar(2 * aic_parameter_count(k)) - Scalar(2) * log_likelihood;
}

/// AIC = 2d − 2 logL.
template <typename Scalar>
Scalar aic_score(const PointCloud<Scalar>& cloud, const Gmm<Scalar>& model) {
  return aic_from_log_likelihood(model.size(), gmm_log_likelihood(cloud, model));
}

inline constexpr double kAkaikeThreshold = 0.01;

template <typename Scalar>
struct AicRow {
  int k;
  Scalar aic;
  Scalar normalized;
  bool kept;
};

template <typename Scalar>
struct AicTable {
  std::vector<AicRow<Scalar>> rows;
};

/// exp((AIC_min − AIC_k)/2) per candidate; kept iff strictly above 0.01.
template <typename Scalar>
AicTable<Scalar> akaike_weights(const std::vector<std::pair<int, Scalar>>& aics) {
  if (aics.empty()) throw InvalidArgument("akaike_weights needs at least one candidate");
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const auto& [k, a] : aics) {
    if (!std::isfinite(static_cast<double>(a))) throw InvalidArgument("AIC values must be finite");
    best = std::min(best, a);
  }
  AicTable<Scalar> table;
  table.rows.reserve(aics.size());
  for (const auto& [k, a] : aics) {
    const Scalar nrm = std::exp((best - a) / Scalar(2));
    table.rows.push_back({k, a, nrm, nrm > Scalar(kAkaikeThreshold)});
  }
  return table;
}

/// p_k = nA_k / Σ nA_j over kept rows, in row order. Fits are matched to rows by K.
template <typename Scalar>
GmmEnsemble<Scalar> ensemble_from_table(const AicTable<Scalar>& table, const std::vector<Gmm<Scalar>>& models) {
  Scalar kept_total = 0;
  for (const auto& r : table.rows) {
    if (r.kept) kept_total += r.normalized;
  }
  std::vector<EnsembleMember<Scalar>> members;
  for (const auto& r : table.rows) {
    if (!r.kept) continue;
    auto it = std::find_if(models.begin(), models.end(), [&](const Gmm<Scalar>& g) { return g.size() == r.k; });
    if (it == models.end()) throw InvalidArgument("no model for K = " + std::to_string(r.k));
    members.push_back({r.normalized / kept_total, *it});
  }
  return GmmEnsemble<Scalar>(std::move(members));
}

/// {1, 2, 4, 8, 16, 32} restricted to K <= max(1, N/10).
inline std::vector<int> default_candidate_ks(long n_points) {
  const long cap = std::max(1L, n_points / 10);
  std::vector<int> ks;
  for (int k : {1, 2, 4, 8, 16, 32}) {
    if (k <= cap) ks.push_back(k);
  }
  return ks;
}

template <typename Scalar>
struct EnsembleFit {
  GmmEnsemble<Scalar> ensemble;
  AicTable<Scalar> table;
  std::vector<FitResult<Scalar>> fits;  // ascending K, successful fits only
  std::vector<std::string> warnings;
};

/// Fits every candidate K, scores with AIC and keeps the Akaike-weighted
/// members above threshold. Candidates are fitted concurrently; results are
/// merged in ascending K so the outcome does not depend on scheduling.
template <typename Scalar>
EnsembleFit<Scalar> build_ensemble(const PointCloud<Scalar>& cloud, std::vector<int> candidate_ks,
                                   const FitConfig& config = {}) {
  std::sort(candidate_ks.begin(), candidate_ks.end());
  candidate_ks.erase(std::unique(candidate_ks.begin(), candidate_ks.end()), candidate_ks.end());
  if (candidate_ks.empty()) throw InvalidArgument("candidate K set is empty");
  for (int k : candidate_ks) {
    if (k < 1 || k > cloud.size()) {
      throw InvalidArgument("candidate K = " + std::to_string(k) + " outside [1, N]");
    }
  }

  std::vector<std::future<FitResult<Scalar>>> pending;
  pending.reserve(candidate_ks.size());
  for (int k : candidate_ks) {
    pending.push_back(std::async(std::launch::async, [&cloud, k, config] { return fit_em(cloud, k, config); }));
  }

  std::vector<FitResult<Scalar>> fits;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    try {
      fits.push_back(pending[i].get());
    } catch (const Error& err) {
      warnings.push_back("K = " + std::to_string(candidate_ks[i]) + " dropped: " + err.what());
    }
  }
  if (fits.empty()) throw Error("every candidate fit failed");

  std::vector<std::pair<int, Scalar>> aics;
  std::vector<Gmm<Scalar>> models;
  for (const auto& f : fits) {
    aics.emplace_back(f.model.size(), aic_from_log_likelihood(f.model.size(), f.log_likelihood_trace.back()));
    models.push_back(f.model);
  }
  auto table = akaike_weights(aics);
  auto ensemble = ensemble_from_table(table, models);
  return {std::move(ensemble), std::move(table), std::move(fits), std::move(warnings)};
}

}  // namespace gmmshape
