#include <cstdio>
#include <sstream>

#include "gmmshape/io.hpp"

namespace gmmshape::io {

using nlohmann::json;

namespace {

json vec_json(const Vec3<double>& v) { return json::array({v(0), v(1), v(2)}); }

Vec3<double> vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json mat_json(const Mat3<double>& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Mat3<double> mat_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3x3 array");
  Mat3<double> m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec_from(j[static_cast<std::size_t>(r)]).transpose();
  return m;
}

void require_schema(const json& j, const std::string& expected) {
  const auto it = j.find("schema_version");
  if (it == j.end() || !it->is_string()) throw IoError("missing schema_version");
  if (it->get<std::string>() != expected) {
    throw IoError("unsupported schema_version '" + it->get<std::string>() + "' (expected " + expected + ")");
  }
}

}  // namespace

json to_json(const Gmm<double>& model) {
  json comps = json::array();
  for (const auto& c : model) {
    comps.push_back({{"weight", c.weight()}, {"mean", vec_json(c.mean())}, {"covariance", mat_json(c.covariance())}});
  }
  return {{"components", comps}};
}

Gmm<double> gmm_from_json(const json& j) {
  std::vector<GaussianComponent<double>> comps;
  for (const auto& c : j.at("components")) {
    comps.emplace_back(c.at("weight").get<double>(), vec_from(c.at("mean")), mat_from(c.at("covariance")));
  }
  return Gmm<double>(std::move(comps));
}

json to_json(const ModelFile& file) {
  json members = json::array();
  for (const auto& m : file.ensemble.members()) {
    json member = to_json(m.model);
    member["p"] = m.p;
    members.push_back(std::move(member));
  }
  json out = {
      {"schema_version", file.schema_version},
      {"n_points", file.n_points},
      {"fit",
       {{"seed", file.fit.seed},
        {"rel_tolerance", file.fit.rel_tolerance},
        {"max_iterations", file.fit.max_iterations},
        {"kmeans_restarts", file.fit.kmeans_restarts}}},
      {"members", members},
  };
  out["label"] = file.label ? json(*file.label) : json(nullptr);
  if (file.aic_table) {
    json rows = json::array();
    for (const auto& r : file.aic_table->rows) {
      rows.push_back({{"k", r.k}, {"aic", r.aic}, {"normalized", r.normalized}, {"kept", r.kept}});
    }
    out["aic_table"] = rows;
  }
  return out;
}

ModelFile model_file_from_json(const json& j) {
  require_schema(j, kModelSchema);
  std::vector<EnsembleMember<double>> members;
  for (const auto& m : j.at("members")) members.push_back({m.at("p").get<double>(), gmm_from_json(m)});

  ModelFile file{.schema_version = kModelSchema, .ensemble = GmmEnsemble<double>(std::move(members))};
  if (j.contains("aic_table")) {
    AicTable<double> table;
    for (const auto& r : j.at("aic_table")) {
      table.rows.push_back(
          {r.at("k").get<int>(), r.at("aic").get<double>(), r.at("normalized").get<double>(), r.at("kept").get<bool>()});
    }
    file.aic_table = std::move(table);
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    file.fit.seed = f.value("seed", file.fit.seed);
    file.fit.rel_tolerance = f.value("rel_tolerance", file.fit.rel_tolerance);
    file.fit.max_iterations = f.value("max_iterations", file.fit.max_iterations);
    file.fit.kmeans_restarts = f.value("kmeans_restarts", file.fit.kmeans_restarts);
  }
  if (j.contains("label") && j.at("label").is_string()) file.label = j.at("label").get<std::string>();
  file.n_points = j.value("n_points", 0L);
  return file;
}

void save_model_file(const ModelFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(file).dump(2) + "\n");
}

ModelFile load_model_file(const std::filesystem::path& path) {
  try {
    return model_file_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw IoError("cannot parse model file '" + path.string() + "': " + e.what());
  }
}

std::string format_aic_table(const AicTable<double>& table) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%6s  %20s  %14s  %s\n", "K", "AIC", "akaike_weight", "kept");
  os << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%6d  %20.6f  %14.6g  %s\n", r.k, r.aic, r.normalized, r.kept ? "yes" : "no");
    os << buf;
  }
  return os.str();
}

}  // namespace gmmshape::io
