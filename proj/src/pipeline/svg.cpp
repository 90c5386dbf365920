#include "bspplan/pipeline/svg.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bspplan {

namespace {

class Canvas {
 public:
  Canvas(const Box& b, int pixels) : b_(b) {
    scale_ = pixels / std::max(b.width(), b.height());
    w_ = b.width() * scale_;
    h_ = b.height() * scale_;
  }
  double x(double v) const { return (v - b_.xmin) * scale_; }
  double y(double v) const { return h_ - (v - b_.ymin) * scale_; }
  double width() const { return w_; }
  double height() const { return h_; }

 private:
  Box b_;
  double scale_;
  double w_;
  double h_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string points(const Canvas& c, const std::vector<Point2>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ' ';
    out += fmt(c.x(ps[i].x)) + "," + fmt(c.y(ps[i].y));
  }
  return out;
}

void line(std::ostringstream& o, const Canvas& c, Point2 a, Point2 b, const char* attrs) {
  o << "<line x1=\"" << fmt(c.x(a.x)) << "\" y1=\"" << fmt(c.y(a.y)) << "\" x2=\"" << fmt(c.x(b.x)) << "\" y2=\""
    << fmt(c.y(b.y)) << "\" " << attrs << "/>\n";
}

void circle(std::ostringstream& o, const Canvas& c, Point2 p, double r, const char* attrs) {
  o << "<circle cx=\"" << fmt(c.x(p.x)) << "\" cy=\"" << fmt(c.y(p.y)) << "\" r=\"" << fmt(r) << "\" " << attrs << "/>\n";
}

}  // namespace

std::string render_svg(const SvgScene& scene) {
  const Box& b = scene.workspace.bounds;
  const Canvas c(b, scene.pixels);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(c.width()) << "\" height=\"" << fmt(c.height())
    << "\" viewBox=\"0 0 " << fmt(c.width()) << " " << fmt(c.height()) << "\">\n";
  o << "<rect class=\"bounds\" x=\"0\" y=\"0\" width=\"" << fmt(c.width()) << "\" height=\"" << fmt(c.height())
    << "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";

  if (!scene.workspace.obstacles.empty()) {
    o << "<g class=\"obstacles\" fill=\"#555\">\n";
    for (const auto& obs : scene.workspace.obstacles) o << "<polygon points=\"" << points(c, obs.vertices()) << "\"/>\n";
    o << "</g>\n";
  }
  if (scene.tree) {
    o << "<g class=\"partition\" stroke=\"#1f77b4\" stroke-width=\"1\" stroke-dasharray=\"4 3\">\n";
    for (const auto& n : scene.tree->nodes()) {
      if (n.is_leaf()) continue;
      if (const auto chord = clip_halfplane_to_cell(*n.plane, n.cell)) line(o, c, chord->a, chord->b, "");
    }
    o << "</g>\n";
  }
  if (scene.graph) {
    const auto& g = *scene.graph;
    o << "<g class=\"graph\" stroke=\"#2ca02c\" stroke-width=\"0.6\">\n";
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (g.is_removed(static_cast<int>(e))) continue;
      line(o, c, g.positions[static_cast<std::size_t>(g.edges[e].u)], g.positions[static_cast<std::size_t>(g.edges[e].v)], "");
    }
    o << "</g>\n<g class=\"candidates\" fill=\"#2ca02c\">\n";
    for (const auto& cand : g.candidates) circle(o, c, cand.position, 2.0, "");
    o << "</g>\n";
  }
  if (!scene.samples.empty()) {
    o << "<g class=\"samples\" fill=\"#9467bd\" fill-opacity=\"0.6\">\n";
    for (Point2 p : scene.samples) circle(o, c, p, 1.5, "class=\"sample\"");
    o << "</g>\n";
  }
  for (const auto& path : scene.paths) {
    o << "<polyline class=\"path\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"" << points(c, path) << "\"/>\n";
  }
  if (!scene.keypoints.empty()) {
    o << "<g class=\"keypoints\" fill=\"#ff7f0e\" stroke=\"black\">\n";
    for (Point2 p : scene.keypoints) circle(o, c, p, 4.0, "");
    o << "</g>\n";
  }
  if (scene.start) circle(o, c, *scene.start, 6.0, "class=\"start\" fill=\"#17becf\" stroke=\"black\"");
  if (scene.goal) circle(o, c, *scene.goal, 6.0, "class=\"goal\" fill=\"#e377c2\" stroke=\"black\"");
  o << "</svg>\n";
  return o.str();
}

void emit_svg(const SvgScene& scene, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + file.string());
  out << render_svg(scene);
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + file.string());
}

}  // namespace bspplan
