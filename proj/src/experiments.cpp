#include "gmmshape/experiments.hpp"

#include "gmmshape/model_selection.hpp"
#include "gmmshape/sampler.hpp"
#include "gmmshape/synthetic.hpp"

namespace gmmshape {

namespace {

struct FittedShape {
  PointCloud<double> cloud;
  GmmEnsemble<double> ensemble;
  std::string label;
};

FittedShape fit_shape(PointCloud<double> cloud, const std::vector<int>& ks, const FitConfig& fit) {
  const auto& candidates = ks.empty() ? default_candidate_ks(cloud.size()) : ks;
  auto ensemble = build_ensemble(cloud, candidates, fit).ensemble;
  std::string label = cloud.label().value_or("");
  return {std::move(cloud), std::move(ensemble), std::move(label)};
}

}  // namespace

ClassifyExperimentResult run_classify_experiment(const ClassifyExperimentConfig& config) {
  const std::vector<std::string> labels{kDementedLabel, kNondementedLabel};
  const std::vector<int> counts{config.generated_demented, config.generated_nondemented};

  std::vector<FittedShape> bases;
  std::vector<FittedShape> generated;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const TubeSpec spec = tube_for_label(labels[c], config.n_points);
    const std::size_t first = bases.size();
    for (int b = 0; b < config.bases_per_class; ++b) {
      const std::uint64_t tube_seed = config.seed * 1000 + c * 100 + static_cast<std::uint64_t>(b);
      bases.push_back(fit_shape(make_bent_tube(spec, tube_seed), config.candidate_ks, config.fit));
    }
    for (int i = 0; i < counts[c]; ++i) {
      const auto& parent = bases[first + static_cast<std::size_t>(i % config.bases_per_class)];
      RngStream rng(config.seed, 10000 + c * 1000 + static_cast<std::uint64_t>(i));
      generated.push_back(fit_shape(generate_point_cloud(parent.ensemble, config.n_points, rng, labels[c]),
                                    config.candidate_ks, config.fit));
    }
  }

  std::vector<PointCloud<double>> base_clouds;
  for (const auto& b : bases) base_clouds.push_back(b.cloud);

  ClassifyExperimentResult result;
  for (std::uint64_t probe_seed : config.probe_seeds) {
    const auto probes = make_probe_set(base_clouds, probe_seed);
    std::vector<LabeledEmbedding<double>> train;
    for (const auto& b : bases) train.push_back({embed(b.ensemble, probes), b.label});
    std::vector<Prediction> predictions;
    for (const auto& g : generated) predictions.push_back({g.label, knn_classify(train, embed(g.ensemble, probes))});
    result.per_probe_seed.push_back(evaluate(predictions, kDementedLabel));
  }
  for (const auto& m : result.per_probe_seed) result.mean_accuracy += m.accuracy;
  if (!result.per_probe_seed.empty()) result.mean_accuracy /= static_cast<double>(result.per_probe_seed.size());
  return result;
}

OutlierExperimentResult run_outlier_experiment(const OutlierExperimentConfig& config) {
  const std::vector<std::string> labels{kDementedLabel, kNondementedLabel};

  std::vector<FittedShape> references;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const TubeSpec spec = tube_for_label(labels[c], config.n_points);
    for (int r = 0; r < config.references_per_class; ++r) {
      const std::uint64_t s = config.seed * 1000 + 500 + c * 100 + static_cast<std::uint64_t>(r);
      references.push_back(fit_shape(make_bent_tube(spec, s), config.candidate_ks, config.fit));
    }
  }

  std::vector<FittedShape> clean;
  std::vector<FittedShape> dirty;
  for (int t = 0; t < config.trials; ++t) {
    const auto& label = labels[static_cast<std::size_t>(t) % labels.size()];
    const std::uint64_t s = config.seed * 1000 + static_cast<std::uint64_t>(t);
    auto cloud = make_bent_tube(tube_for_label(label, config.n_points), s);
    const auto box = bounding_box(std::vector<PointCloud<double>>{cloud});
    auto noisy = add_outliers(cloud, config.fraction, box, s + 1);
    clean.push_back(fit_shape(std::move(cloud), config.candidate_ks, config.fit));
    dirty.push_back(fit_shape(std::move(noisy), config.candidate_ks, config.fit));
  }

  std::vector<PointCloud<double>> all;
  for (const auto& r : references) all.push_back(r.cloud);
  for (const auto& c : clean) all.push_back(c.cloud);
  const auto probes = make_probe_set(all, config.probe_seed);

  std::vector<SphereEmbedding<double>> ref_emb;
  for (const auto& r : references) ref_emb.push_back(embed(r.ensemble, probes));

  OutlierExperimentResult result;
  for (int t = 0; t < config.trials; ++t) {
    const auto& c = clean[static_cast<std::size_t>(t)];
    const auto refit = embed(dirty[static_cast<std::size_t>(t)].ensemble, probes);
    const double own = arc_distance(refit, embed(c.ensemble, probes));
    double other = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < references.size(); ++r) {
      if (references[r].label != c.label) other = std::min(other, arc_distance(refit, ref_emb[r]));
    }
    ++result.trials;
    if (own < other) ++result.robust;
  }
  return result;
}

}  // namespace gmmshape
