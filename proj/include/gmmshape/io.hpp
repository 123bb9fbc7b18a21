#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmmshape/embedding.hpp"
#include "gmmshape/em.hpp"
#include "gmmshape/model.hpp"
#include "gmmshape/model_selection.hpp"

namespace gmmshape::io {

using Cloud = PointCloud<double>;

enum class CloudFormat { Xyz, Csv };

/// `.csv` selects CSV; anything else is XYZ.
CloudFormat format_for_path(const std::filesystem::path& path);

/// XYZ: one whitespace-separated "x y z" triple per line. CSV: an optional
/// header, then rows whose first three numeric fields are the coordinates.
/// '#' starts a comment line in both; a "# label: <tag>" comment sets the
/// cloud's label.
Cloud read_point_cloud(const std::filesystem::path& path, CloudFormat format);
Cloud read_point_cloud(const std::filesystem::path& path);

Cloud parse_point_cloud(const std::string& text, CloudFormat format);
std::string format_point_cloud(const Cloud& cloud, CloudFormat format);

void write_point_cloud(const Cloud& cloud, const std::filesystem::path& path, CloudFormat format);
void write_point_cloud(const Cloud& cloud, const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model files

inline const std::string kModelSchema = "gmmshape.model/1";
inline const std::string kProbeSchema = "gmmshape.probes/1";
inline const std::string kEmbeddingSchema = "gmmshape.embeddings/1";

struct ModelFile {
  std::string schema_version = kModelSchema;
  GmmEnsemble<double> ensemble;
  std::optional<AicTable<double>> aic_table;
  FitConfig fit;
  std::optional<std::string> label;
  long n_points = 0;
};

nlohmann::json to_json(const Gmm<double>& model);
Gmm<double> gmm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);

void save_model_file(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model_file(const std::filesystem::path& path);

/// Plain-text AIC table, one row per candidate.
std::string format_aic_table(const AicTable<double>& table);

// ---------------------------------------------------------------------------
// Probe sets and embeddings

nlohmann::json to_json(const ProbeSet<double>& probes);
ProbeSet<double> probe_set_from_json(const nlohmann::json& j);
void save_probe_set(const ProbeSet<double>& probes, const std::filesystem::path& path);
ProbeSet<double> load_probe_set(const std::filesystem::path& path);

struct EmbeddingFile {
  std::string schema_version = kEmbeddingSchema;
  std::uint64_t probe_seed = 0;
  std::vector<SphereEmbedding<double>> embeddings;
};

nlohmann::json to_json(const EmbeddingFile& file);
EmbeddingFile embedding_file_from_json(const nlohmann::json& j);
void save_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path);
EmbeddingFile load_embedding_file(const std::filesystem::path& path);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// SVG figures

enum class Projection { XY, XZ, YZ };

Projection parse_projection(const std::string& name);

/// Equal-aspect 2D scatter of the chosen axis pair, one <circle> per point.
std::string render_svg(const std::vector<std::pair<Cloud, std::string>>& clouds, Projection projection);
void emit_svg(const std::vector<std::pair<Cloud, std::string>>& clouds, const std::filesystem::path& path,
              Projection projection);

/// Panels side by side on a shared scale, each captioned.
std::string render_svg_filmstrip(const std::vector<Cloud>& panels, const std::vector<std::string>& captions,
                                 Projection projection, const std::string& color = "#1f77b4");
void emit_svg_filmstrip(const std::vector<Cloud>& panels, const std::vector<std::string>& captions,
                        const std::filesystem::path& path, Projection projection,
                        const std::string& color = "#1f77b4");

}  // namespace gmmshape::io
