#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "gmmshape/io.hpp"

namespace gmmshape::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::optional<double> parse_number(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty()) return std::nullopt;
  double v = 0;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw IoError("malformed point cloud at line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CloudFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? CloudFormat::Csv : CloudFormat::Xyz;
}

Cloud parse_point_cloud(const std::string& text, CloudFormat format) {
  std::vector<Vec3<double>> pts;
  std::optional<std::string> label;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool header_allowed = format == CloudFormat::Csv;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      if (body.rfind("label:", 0) == 0) label = trim(body.substr(6));
      continue;
    }

    Vec3<double> p;
    if (format == CloudFormat::Xyz) {
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() != 3) malformed(line_no, "expected 3 values, found " + std::to_string(tokens.size()));
      for (int d = 0; d < 3; ++d) {
        const auto v = parse_number(tokens[static_cast<std::size_t>(d)]);
        if (!v) malformed(line_no, "'" + tokens[static_cast<std::size_t>(d)] + "' is not a number");
        p(d) = *v;
      }
    } else {
      const auto fields = split_csv(line);
      int found = 0;
      for (const auto& f : fields) {
        if (found == 3) break;
        if (const auto v = parse_number(f)) p(found++) = *v;
      }
      if (found == 0 && header_allowed) {
        header_allowed = false;
        continue;
      }
      if (found < 3) malformed(line_no, "expected 3 numeric columns, found " + std::to_string(found));
    }
    header_allowed = false;
    if (!p.allFinite()) malformed(line_no, "non-finite coordinate");
    pts.push_back(p);
  }
  if (pts.empty()) throw IoError("point cloud file contains no points");
  return Cloud::from_points(pts, label);
}

Cloud read_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  return parse_point_cloud(read_file(path), format);
}

Cloud read_point_cloud(const std::filesystem::path& path) { return read_point_cloud(path, format_for_path(path)); }

std::string format_point_cloud(const Cloud& cloud, CloudFormat format) {
  std::string out;
  if (cloud.label()) out += "# label: " + *cloud.label() + "\n";
  const char sep = format == CloudFormat::Csv ? ',' : ' ';
  if (format == CloudFormat::Csv) out += "x,y,z\n";
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    out += format_double(p(0));
    out += sep;
    out += format_double(p(1));
    out += sep;
    out += format_double(p(2));
    out += '\n';
  }
  return out;
}

void write_point_cloud(const Cloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  write_file_atomic(path, format_point_cloud(cloud, format));
}

void write_point_cloud(const Cloud& cloud, const std::filesystem::path& path) {
  write_point_cloud(cloud, path, format_for_path(path));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.empty()) throw IoError("output path is empty");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gmmshape::io
