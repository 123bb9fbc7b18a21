#pragma once

#include <cstdint>
#include <vector>

#include "gmmshape/embedding.hpp"
#include "gmmshape/em.hpp"

namespace gmmshape {

/// Synthetic stand-in for the generate-then-classify study: a few base tubes
/// per class are fitted, new clouds are sampled from those fits, the sampled
/// clouds are refitted, and each refit is labeled by 1-NN against the base
/// fits on the probe sphere.
struct ClassifyExperimentConfig {
  int bases_per_class = 5;
  int generated_demented = 33;
  int generated_nondemented = 36;
  long n_points = 1000;
  std::vector<int> candidate_ks;  // empty: default_candidate_ks(n_points)
  FitConfig fit;
  std::uint64_t seed = 2024;
  std::vector<std::uint64_t> probe_seeds{1, 2, 3, 4, 5};
};

struct ClassifyExperimentResult {
  std::vector<ClassificationMetrics> per_probe_seed;
  double mean_accuracy = 0;
};

ClassifyExperimentResult run_classify_experiment(const ClassifyExperimentConfig& config);

/// Refits tubes after uniform outlier contamination and checks the refit
/// embedding stays nearest to its own clean fit.
struct OutlierExperimentConfig {
  int trials = 20;
  double fraction = 0.05;
  int references_per_class = 5;
  long n_points = 1000;
  std::vector<int> candidate_ks;
  FitConfig fit;
  std::uint64_t seed = 77;
  std::uint64_t probe_seed = 1;
};

struct OutlierExperimentResult {
  int trials = 0;
  int robust = 0;  // refit nearer its clean fit than any other-class fit
};

OutlierExperimentResult run_outlier_experiment(const OutlierExperimentConfig& config);

}  // namespace gmmshape
