#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "gmmshape/experiments.hpp"
#include "gmmshape/gmmshape.hpp"
#include "gmmshape/io.hpp"

namespace fs = std::filesystem;
using namespace gmmshape;
using Cloud = PointCloud<double>;

namespace {

std::string frame_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%.2f", t);
  return buf;
}

Cloud centered(const Cloud& c) {
  const Points3<double> pts = c.points().colwise() - sample_mean(c.points());
  return Cloud(pts, c.label());
}

void print_metrics(const ClassificationMetrics& m) {
  std::printf("positive class: %s\n", m.positive_label.c_str());
  std::printf("accuracy:    %.4f\n", m.accuracy);
  std::printf("sensitivity: %.4f  (TP %d, FN %d)\n", m.sensitivity, m.true_positive, m.false_negative);
  std::printf("specificity: %.4f  (TN %d, FP %d)\n", m.specificity, m.true_negative, m.false_positive);
}

struct FitOptions {
  std::vector<int> ks;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iter = 200;
  int restarts = 4;

  FitConfig config() const { return {max_iter, tol, seed, restarts}; }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--ks", ks, "Candidate component counts (default 1,2,4,8,16,32 capped at N/10)")->delimiter(',');
    cmd->add_option("--seed", seed, "Seed for k-means initialization and sampling");
    cmd->add_option("--tol", tol, "Relative log-likelihood tolerance for EM convergence");
    cmd->add_option("--max-iter", max_iter, "Maximum EM iterations");
    cmd->add_option("--restarts", restarts, "k-means restarts");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-mixture point-cloud fitting, generation, interpolation and classification"};
  app.require_subcommand(1);

  // fit ----------------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit an AIC-weighted GMM ensemble to a point cloud");
  std::string fit_in, fit_out, fit_label;
  bool fit_center = false;
  FitOptions fit_opts;
  fit_cmd->add_option("cloud", fit_in, "Input point cloud (.xyz or .csv)")->required();
  fit_cmd->add_option("-o,--output", fit_out, "Model file to write")->required();
  fit_cmd->add_option("--label", fit_label, "Class label stored in the model (defaults to the cloud's)");
  fit_cmd->add_flag("--center", fit_center, "Subtract the cloud mean before fitting");
  fit_opts.add_to(fit_cmd);

  // sample -------------------------------------------------------------------
  auto* sample_cmd = app.add_subcommand("sample", "Draw a point cloud from a fitted model");
  std::string sample_in, sample_out, sample_svg;
  long sample_n = 0;
  std::uint64_t sample_seed = 0;
  sample_cmd->add_option("model", sample_in, "Model file")->required();
  sample_cmd->add_option("-o,--output", sample_out, "Output point cloud")->required();
  sample_cmd->add_option("--n", sample_n, "Number of points (default: training cloud size)");
  sample_cmd->add_option("--seed", sample_seed, "Sampling seed");
  sample_cmd->add_option("--svg", sample_svg, "Also write an SVG scatter (xy projection)");

  // interpolate ----------------------------------------------------------------
  auto* interp_cmd = app.add_subcommand("interpolate", "Generate clouds along the geodesic between two shapes");
  std::string interp_a, interp_b, interp_dir, interp_proj = "xy";
  std::vector<double> interp_ts = default_interpolation_times();
  long interp_n = 0;
  FitOptions interp_opts;
  interp_cmd->add_option("cloudA", interp_a, "Start cloud")->required();
  interp_cmd->add_option("cloudB", interp_b, "End cloud")->required();
  interp_cmd->add_option("-o,--output", interp_dir, "Output directory")->required();
  interp_cmd->add_option("--ts", interp_ts, "Geodesic times in [0,1]")->delimiter(',');
  interp_cmd->add_option("--n", interp_n, "Points per frame (default: size of cloudA)");
  interp_cmd->add_option("--projection", interp_proj, "SVG projection: xy, xz or yz");
  interp_opts.add_to(interp_cmd);

  // synth ----------------------------------------------------------------------
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic bent-tube shape");
  std::string synth_class, synth_out, synth_svg;
  std::uint64_t synth_seed = 0;
  long synth_n = 1000;
  double synth_outliers = 0.0;
  synth_cmd->add_option("--class", synth_class, "demented or nondemented")
      ->required()
      ->check(CLI::IsMember({kDementedLabel, kNondementedLabel}));
  synth_cmd->add_option("-o,--output", synth_out, "Output point cloud")->required();
  synth_cmd->add_option("--seed", synth_seed, "Generation seed");
  synth_cmd->add_option("--n", synth_n, "Number of points");
  synth_cmd->add_option("--outliers", synth_outliers, "Fraction of points replaced by uniform outliers");
  synth_cmd->add_option("--svg", synth_svg, "Also write an SVG scatter (xy projection)");

  // probes ---------------------------------------------------------------------
  auto* probes_cmd = app.add_subcommand("probes", "Draw a shared probe set covering the given clouds");
  std::vector<std::string> probes_in;
  std::string probes_out;
  std::uint64_t probes_seed = 0;
  int probes_count = kDefaultProbeCount;
  probes_cmd->add_option("clouds", probes_in, "Point clouds the probes must cover")->required();
  probes_cmd->add_option("-o,--output", probes_out, "Probe file to write")->required();
  probes_cmd->add_option("--seed", probes_seed, "Probe seed");
  probes_cmd->add_option("--count", probes_count, "Number of probes");

  // embed ----------------------------------------------------------------------
  auto* embed_cmd = app.add_subcommand("embed", "Embed fitted models on the probe sphere");
  std::vector<std::string> embed_in;
  std::string embed_probes, embed_out;
  std::uint64_t embed_seed = 0;
  embed_cmd->add_option("models", embed_in, "Model files")->required();
  embed_cmd->add_option("--probes", embed_probes, "Probe file")->required();
  embed_cmd->add_option("-o,--output", embed_out, "Embedding file to write")->required();
  embed_cmd->add_option("--seed", embed_seed, "Unused; accepted for uniformity");

  // classify -------------------------------------------------------------------
  auto* classify_cmd = app.add_subcommand("classify", "1-NN classification of embeddings");
  std::string classify_train, classify_test, classify_positive = kDementedLabel, classify_out;
  std::uint64_t classify_seed = 0;
  classify_cmd->add_option("--train", classify_train, "Labeled training embeddings")->required();
  classify_cmd->add_option("--test", classify_test, "Embeddings to classify")->required();
  classify_cmd->add_option("--positive", classify_positive, "Positive class for sensitivity/specificity");
  classify_cmd->add_option("-o,--output", classify_out, "Write predictions as JSON");
  classify_cmd->add_option("--seed", classify_seed, "Unused; accepted for uniformity");

  // eval-paper-pipeline --------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval-paper-pipeline", "Synthetic generate-then-classify experiment");
  ClassifyExperimentConfig eval_cfg;
  std::string eval_out;
  eval_cmd->add_option("--seeds", eval_cfg.probe_seeds, "Probe-set seeds to average over")->delimiter(',');
  eval_cmd->add_option("--seed", eval_cfg.seed, "Seed for shapes and generated clouds");
  eval_cmd->add_option("--n", eval_cfg.n_points, "Points per cloud");
  eval_cmd->add_option("--ks", eval_cfg.candidate_ks, "Candidate component counts")->delimiter(',');
  eval_cmd->add_option("-o,--output", eval_out, "Write a JSON report");

  // sweep ----------------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "Sample one cloud per fixed K (single-K fits)");
  std::string sweep_in, sweep_dir, sweep_proj = "xy";
  std::vector<int> sweep_ks{2, 4, 8, 16, 32};
  std::uint64_t sweep_seed = 0;
  long sweep_n = 0;
  sweep_cmd->add_option("cloud", sweep_in, "Input point cloud")->required();
  sweep_cmd->add_option("-o,--output", sweep_dir, "Output directory")->required();
  sweep_cmd->add_option("--ks", sweep_ks, "Component counts")->delimiter(',');
  sweep_cmd->add_option("--seed", sweep_seed, "Fit and sampling seed");
  sweep_cmd->add_option("--n", sweep_n, "Points per sample (default: input size)");
  sweep_cmd->add_option("--projection", sweep_proj, "SVG projection: xy, xz or yz");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) {
      Cloud cloud = io::read_point_cloud(fit_in);
      if (fit_center) cloud = centered(cloud);
      const auto ks = fit_opts.ks.empty() ? default_candidate_ks(cloud.size()) : fit_opts.ks;
      auto result = build_ensemble(cloud, ks, fit_opts.config());
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << io::format_aic_table(result.table);
      io::ModelFile file{.ensemble = result.ensemble, .aic_table = result.table, .fit = fit_opts.config()};
      file.label = fit_label.empty() ? cloud.label() : std::optional<std::string>(fit_label);
      file.n_points = static_cast<long>(cloud.size());
      io::save_model_file(file, fit_out);
    } else if (sample_cmd->parsed()) {
      const auto file = io::load_model_file(sample_in);
      const long n = sample_n > 0 ? sample_n : file.n_points;
      if (n < 1) throw InvalidArgument("model file has no training size; pass --n");
      RngStream rng(sample_seed);
      const Cloud out = generate_point_cloud(file.ensemble, n, rng, file.label);
      io::write_point_cloud(out, sample_out);
      if (!sample_svg.empty()) io::emit_svg({{out, "#1f77b4"}}, sample_svg, io::Projection::XY);
    } else if (interp_cmd->parsed()) {
      const Cloud a = io::read_point_cloud(interp_a);
      const Cloud b = io::read_point_cloud(interp_b);
      InterpolationConfig cfg{interp_opts.ks, interp_opts.config(), interp_opts.seed};
      const long n = interp_n > 0 ? interp_n : static_cast<long>(a.size());
      const auto res = interpolate_point_clouds(a, b, interp_ts, n, cfg);
      fs::create_directories(interp_dir);
      std::vector<std::string> captions;
      for (std::size_t i = 0; i < res.ts.size(); ++i) {
        const std::string tag = frame_tag(res.ts[i]);
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%02zu_%s", i, tag.c_str());
        io::write_point_cloud(res.clouds[i], fs::path(interp_dir) / (std::string(name) + ".xyz"));
        io::ModelFile frame_file{.ensemble = GmmEnsemble<double>::single(res.models[i]), .fit = interp_opts.config()};
        frame_file.n_points = n;
        io::save_model_file(frame_file, fs::path(interp_dir) / (std::string(name) + ".model.json"));
        captions.push_back("t = " + tag.substr(1));
      }
      io::emit_svg_filmstrip(res.clouds, captions, fs::path(interp_dir) / "filmstrip.svg",
                             io::parse_projection(interp_proj));
      std::cout << "K = " << res.k << ", " << res.ts.size() << " frames written to " << interp_dir << "\n";
    } else if (synth_cmd->parsed()) {
      Cloud cloud = make_bent_tube(tube_for_label(synth_class, synth_n), synth_seed);
      if (synth_outliers > 0) {
        const auto box = bounding_box(std::vector<Cloud>{cloud});
        cloud = add_outliers(cloud, synth_outliers, box, synth_seed + 1);
      }
      io::write_point_cloud(cloud, synth_out);
      if (!synth_svg.empty()) io::emit_svg({{cloud, "#d62728"}}, synth_svg, io::Projection::XY);
    } else if (probes_cmd->parsed()) {
      std::vector<Cloud> clouds;
      for (const auto& p : probes_in) clouds.push_back(io::read_point_cloud(p));
      io::save_probe_set(make_probe_set(clouds, probes_seed, probes_count), probes_out);
    } else if (embed_cmd->parsed()) {
      const auto probes = io::load_probe_set(embed_probes);
      io::EmbeddingFile out;
      out.probe_seed = probes.seed;
      for (const auto& path : embed_in) {
        const auto file = io::load_model_file(path);
        auto e = embed(file.ensemble, probes);
        std::string stem = fs::path(path).filename().string();
        if (const auto pos = stem.find('.'); pos != std::string::npos) stem = stem.substr(0, pos);
        e.name = stem;
        e.label = file.label;
        out.embeddings.push_back(std::move(e));
      }
      io::save_embedding_file(out, embed_out);
    } else if (classify_cmd->parsed()) {
      const auto train_file = io::load_embedding_file(classify_train);
      const auto test_file = io::load_embedding_file(classify_test);
      if (train_file.probe_seed != test_file.probe_seed) {
        std::cerr << "warning: train and test embeddings use different probe seeds\n";
      }
      std::vector<LabeledEmbedding<double>> train;
      for (const auto& e : train_file.embeddings) {
        if (!e.label) throw InvalidArgument("training embedding '" + e.name + "' has no label");
        train.push_back({e, *e.label});
      }
      std::vector<Prediction> predictions;
      nlohmann::json report = nlohmann::json::array();
      for (const auto& e : test_file.embeddings) {
        const std::string predicted = knn_classify(train, e);
        std::cout << e.name << "\t" << predicted << (e.label ? "\t(truth " + *e.label + ")" : "") << "\n";
        report.push_back({{"name", e.name}, {"predicted", predicted}});
        if (e.label) {
          report.back()["truth"] = *e.label;
          predictions.push_back({*e.label, predicted});
        }
      }
      if (!predictions.empty()) print_metrics(evaluate(predictions, classify_positive));
      if (!classify_out.empty()) io::write_file_atomic(classify_out, report.dump(2) + "\n");
    } else if (eval_cmd->parsed()) {
      const auto res = run_classify_experiment(eval_cfg);
      nlohmann::json report = {{"mean_accuracy", res.mean_accuracy}, {"per_probe_seed", nlohmann::json::array()}};
      for (std::size_t i = 0; i < res.per_probe_seed.size(); ++i) {
        const auto& m = res.per_probe_seed[i];
        std::cout << "probe seed " << eval_cfg.probe_seeds[i] << ":\n";
        print_metrics(m);
        report["per_probe_seed"].push_back({{"probe_seed", eval_cfg.probe_seeds[i]},
                                            {"accuracy", m.accuracy},
                                            {"sensitivity", m.sensitivity},
                                            {"specificity", m.specificity}});
      }
      std::printf("mean accuracy over %zu probe sets: %.4f\n", res.per_probe_seed.size(), res.mean_accuracy);
      if (!eval_out.empty()) io::write_file_atomic(eval_out, report.dump(2) + "\n");
    } else if (sweep_cmd->parsed()) {
      const Cloud cloud = io::read_point_cloud(sweep_in);
      const long n = sweep_n > 0 ? sweep_n : static_cast<long>(cloud.size());
      fs::create_directories(sweep_dir);
      std::vector<Cloud> panels{cloud};
      std::vector<std::string> captions{"original"};
      for (int k : sweep_ks) {
        FitConfig cfg;
        cfg.seed = sweep_seed;
        const auto fit = fit_em(cloud, k, cfg);
        RngStream rng(sweep_seed, static_cast<std::uint64_t>(k));
        Cloud sample = generate_point_cloud(fit.model, n, rng, cloud.label());
        io::write_point_cloud(sample, fs::path(sweep_dir) / ("sample_K" + std::to_string(k) + ".xyz"));
        panels.push_back(std::move(sample));
        captions.push_back("K = " + std::to_string(k));
      }
      io::emit_svg_filmstrip(panels, captions, fs::path(sweep_dir) / "samples.svg", io::parse_projection(sweep_proj));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
