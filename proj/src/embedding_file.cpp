#include "gmmshape/io.hpp"

namespace gmmshape::io {

using nlohmann::json;

namespace {

void require_schema(const json& j, const std::string& expected) {
  if (j.value("schema_version", std::string()) != expected) {
    throw IoError("unsupported or missing schema_version (expected " + expected + ")");
  }
}

}  // namespace

json to_json(const ProbeSet<double>& probes) {
  json pts = json::array();
  for (Eigen::Index i = 0; i < probes.size(); ++i) {
    pts.push_back(json::array({probes.probes(0, i), probes.probes(1, i), probes.probes(2, i)}));
  }
  return {{"schema_version", kProbeSchema},
          {"seed", probes.seed},
          {"bounds",
           {{"lo", {probes.bounds.lo(0), probes.bounds.lo(1), probes.bounds.lo(2)}},
            {"hi", {probes.bounds.hi(0), probes.bounds.hi(1), probes.bounds.hi(2)}}}},
          {"probes", pts}};
}

ProbeSet<double> probe_set_from_json(const json& j) {
  require_schema(j, kProbeSchema);
  ProbeSet<double> out;
  out.seed = j.at("seed").get<std::uint64_t>();
  const auto& b = j.at("bounds");
  for (int d = 0; d < 3; ++d) {
    out.bounds.lo(d) = b.at("lo").at(static_cast<std::size_t>(d)).get<double>();
    out.bounds.hi(d) = b.at("hi").at(static_cast<std::size_t>(d)).get<double>();
  }
  const auto& pts = j.at("probes");
  if (pts.empty()) throw IoError("probe set is empty");
  out.probes.resize(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int d = 0; d < 3; ++d) out.probes(d, static_cast<Eigen::Index>(i)) = pts[i].at(static_cast<std::size_t>(d)).get<double>();
  }
  return out;
}

void save_probe_set(const ProbeSet<double>& probes, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(probes).dump() + "\n");
}

ProbeSet<double> load_probe_set(const std::filesystem::path& path) {
  try {
    return probe_set_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw IoError("cannot parse probe file '" + path.string() + "': " + e.what());
  }
}

json to_json(const EmbeddingFile& file) {
  json items = json::array();
  for (const auto& e : file.embeddings) {
    json item = {{"name", e.name}, {"coords", std::vector<double>(e.coords.data(), e.coords.data() + e.coords.size())}};
    item["label"] = e.label ? json(*e.label) : json(nullptr);
    items.push_back(std::move(item));
  }
  return {{"schema_version", file.schema_version}, {"probe_seed", file.probe_seed}, {"embeddings", items}};
}

EmbeddingFile embedding_file_from_json(const json& j) {
  require_schema(j, kEmbeddingSchema);
  EmbeddingFile out;
  out.probe_seed = j.value("probe_seed", std::uint64_t{0});
  for (const auto& item : j.at("embeddings")) {
    SphereEmbedding<double> e;
    const auto coords = item.at("coords").get<std::vector<double>>();
    e.coords = Eigen::Map<const DynVector<double>>(coords.data(), static_cast<Eigen::Index>(coords.size()));
    e.name = item.value("name", std::string());
    if (item.contains("label") && item.at("label").is_string()) e.label = item.at("label").get<std::string>();
    out.embeddings.push_back(std::move(e));
  }
  return out;
}

void save_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(file).dump() + "\n");
}

EmbeddingFile load_embedding_file(const std::filesystem::path& path) {
  try {
    return embedding_file_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw IoError("cannot parse embedding file '" + path.string() + "': " + e.what());
  }
}

}  // namespace gmmshape::io
