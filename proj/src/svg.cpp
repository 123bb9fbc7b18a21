#include <algorithm>
#include <cstdio>
#include <limits>

#include "gmmshape/io.hpp"

namespace gmmshape::io {

namespace {

std::pair<int, int> axes_of(Projection p) {
  switch (p) {
    case Projection::XY: return {0, 1};
    case Projection::XZ: return {0, 2};
    case Projection::YZ: return {1, 2};
  }
  return {0, 1};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double min_u, max_u, min_v, max_v;

  double width() const { return max_u - min_u; }
  double height() const { return max_v - min_v; }
};

Frame frame_of(const std::vector<const Cloud*>& clouds, Projection projection) {
  const auto [a, b] = axes_of(projection);
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Cloud* c : clouds) {
    f.min_u = std::min(f.min_u, c->points().row(a).minCoeff());
    f.max_u = std::max(f.max_u, c->points().row(a).maxCoeff());
    f.min_v = std::min(f.min_v, c->points().row(b).minCoeff());
    f.max_v = std::max(f.max_v, c->points().row(b).maxCoeff());
  }
  const double span = std::max({f.width(), f.height(), 1e-9});
  const double pad = 0.05 * span;
  // Degenerate axes get the same extent as the other so the aspect stays 1:1 and visible.
  if (f.width() < 1e-12 * span + 1e-300) {
    f.min_u -= 0.5 * span;
    f.max_u += 0.5 * span;
  }
  if (f.height() < 1e-12 * span + 1e-300) {
    f.min_v -= 0.5 * span;
    f.max_v += 0.5 * span;
  }
  f.min_u -= pad;
  f.max_u += pad;
  f.min_v -= pad;
  f.max_v += pad;
  return f;
}

void append_markers(std::string& out, const Cloud& cloud, Projection projection, const std::string& color,
                    double radius) {
  const auto [a, b] = axes_of(projection);
  out += "<g fill=\"" + color + "\" fill-opacity=\"0.6\">\n";
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    // SVG y grows downward; flip so +v points up.
    out += "<circle cx=\"" + num(cloud.points()(a, i)) + "\" cy=\"" + num(-cloud.points()(b, i)) + "\" r=\"" +
           num(radius) + "\"/>\n";
  }
  out += "</g>\n";
}

std::string header(double x, double y, double w, double h, double px_width) {
  const double px_height = px_width * h / w;
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(px_width) + "\" height=\"" + num(px_height) +
         "\" viewBox=\"" + num(x) + " " + num(y) + " " + num(w) + " " + num(h) +
         "\" preserveAspectRatio=\"xMidYMid meet\">\n<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
}

}  // namespace

Projection parse_projection(const std::string& name) {
  if (name == "xy") return Projection::XY;
  if (name == "xz") return Projection::XZ;
  if (name == "yz") return Projection::YZ;
  throw InvalidArgument("unknown projection '" + name + "' (expected xy, xz or yz)");
}

std::string render_svg(const std::vector<std::pair<Cloud, std::string>>& clouds, Projection projection) {
  if (clouds.empty()) throw InvalidArgument("nothing to draw");
  std::vector<const Cloud*> ptrs;
  for (const auto& c : clouds) ptrs.push_back(&c.first);
  const Frame f = frame_of(ptrs, projection);
  const double radius = 0.004 * std::max(f.width(), f.height());

  std::string out = header(f.min_u, -f.max_v, f.width(), f.height(), 480.0);
  for (const auto& [cloud, color] : clouds) append_markers(out, cloud, projection, color, radius);
  out += "</svg>\n";
  return out;
}

void emit_svg(const std::vector<std::pair<Cloud, std::string>>& clouds, const std::filesystem::path& path,
              Projection projection) {
  write_file_atomic(path, render_svg(clouds, projection));
}

std::string render_svg_filmstrip(const std::vector<Cloud>& panels, const std::vector<std::string>& captions,
                                 Projection projection, const std::string& color) {
  if (panels.empty()) throw InvalidArgument("nothing to draw");
  std::vector<const Cloud*> ptrs;
  for (const auto& c : panels) ptrs.push_back(&c);
  const Frame f = frame_of(ptrs, projection);
  const double radius = 0.004 * std::max(f.width(), f.height());
  const double step = f.width() * 1.05;
  const double caption_h = 0.12 * f.height();
  const double total_w = step * static_cast<double>(panels.size());
  const double total_h = f.height() + caption_h;

  std::string out = header(f.min_u, -f.max_v, total_w, total_h, 240.0 * static_cast<double>(panels.size()));
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double dx = step * static_cast<double>(i);
    out += "<g transform=\"translate(" + num(dx) + " 0)\">\n";
    append_markers(out, panels[i], projection, color, radius);
    if (i < captions.size()) {
      out += "<text x=\"" + num(f.min_u + 0.5 * f.width()) + "\" y=\"" + num(-f.min_v + 0.9 * caption_h) +
             "\" font-size=\"" + num(0.7 * caption_h) + "\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
             captions[i] + "</text>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

void emit_svg_filmstrip(const std::vector<Cloud>& panels, const std::vector<std::string>& captions,
                        const std::filesystem::path& path, Projection projection, const std::string& color) {
  write_file_atomic(path, render_svg_filmstrip(panels, captions, projection, color));
}

}  // namespace gmmshape::io
