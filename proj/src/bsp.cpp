#include "bspplan/bsp.hpp"

#include <algorithm>
#include <tuple>

#include "bspplan/common.hpp"

namespace bspplan {

namespace {

struct Fragment {
  Point2 a;
  Point2 b;
  int obstacle;
  int facet;
};

bool properly_splits(const Halfplane& h, const ConvexPolygon& cell) {
  bool in = false;
  bool out = false;
  for (const auto& v : cell.vertices()) {
    const double s = h.signed_distance(v);
    in = in || s < -kDegeneracyTol;
    out = out || s > kDegeneracyTol;
  }
  return in && out;
}

bool crosses(const Halfplane& h, const Fragment& f) {
  const double sa = h.signed_distance(f.a);
  const double sb = h.signed_distance(f.b);
  return (sa < -kDegeneracyTol && sb > kDegeneracyTol) || (sa > kDegeneracyTol && sb < -kDegeneracyTol);
}

class Builder {
 public:
  explicit Builder(const Workspace& w) : w_(w) {}

  int build(const ConvexPolygon& cell, std::vector<Fragment> frags, std::vector<BspNode>& nodes,
            std::vector<int>& free_leaves) {
    std::erase_if(frags, [&](const Fragment& f) { return !properly_splits(facet_plane(f), cell); });

    const int index = static_cast<int>(nodes.size());
    nodes.push_back(BspNode{cell, std::nullopt});

    if (frags.empty()) {
      BspNode& leaf = nodes[static_cast<std::size_t>(index)];
      if (point_in_free_space(cell.centroid(), w_)) {
        leaf.status = LeafStatus::Free;
        leaf.free_index = static_cast<int>(free_leaves.size());
        free_leaves.push_back(index);
      } else {
        leaf.status = LeafStatus::Occupied;
      }
      return index;
    }

    const Fragment& chosen = choose(frags);
    const Halfplane h = facet_plane(chosen);
    const int chosen_obstacle = chosen.obstacle;
    const int chosen_facet = chosen.facet;
    SplitResult parts = split_polygon(cell, h);

    std::vector<Fragment> in_frags;
    std::vector<Fragment> out_frags;
    for (const auto& f : frags) {
      const double sa = h.signed_distance(f.a);
      const double sb = h.signed_distance(f.b);
      const bool a_on = std::abs(sa) <= kDegeneracyTol;
      const bool b_on = std::abs(sb) <= kDegeneracyTol;
      if (a_on && b_on) continue;  // collinear with the splitting line: consumed
      if (sa <= kDegeneracyTol && sb <= kDegeneracyTol) {
        in_frags.push_back(f);
      } else if (sa >= -kDegeneracyTol && sb >= -kDegeneracyTol) {
        out_frags.push_back(f);
      } else {
        const Point2 p = f.a + (f.b - f.a) * (sa / (sa - sb));
        Fragment neg = f;
        Fragment pos = f;
        if (sa < 0.0) {
          neg.b = p;
          pos.a = p;
        } else {
          pos.b = p;
          neg.a = p;
        }
        if (distance(neg.a, neg.b) > kDegeneracyTol) in_frags.push_back(neg);
        if (distance(pos.a, pos.b) > kDegeneracyTol) out_frags.push_back(pos);
      }
    }

    if (!parts.inside || !parts.outside) {
      // Tolerance collapsed one side; the line is spent, continue on this cell.
      nodes.pop_back();
      std::erase_if(frags, [&](const Fragment& f) {
        return f.obstacle == chosen_obstacle && f.facet == chosen_facet;
      });
      return build(cell, std::move(frags), nodes, free_leaves);
    }

    nodes[static_cast<std::size_t>(index)].plane = h;
    nodes[static_cast<std::size_t>(index)].obstacle = chosen_obstacle;
    nodes[static_cast<std::size_t>(index)].facet = chosen_facet;
    const int in_child = build(*parts.inside, std::move(in_frags), nodes, free_leaves);
    const int out_child = build(*parts.outside, std::move(out_frags), nodes, free_leaves);
    nodes[static_cast<std::size_t>(index)].inside = in_child;
    nodes[static_cast<std::size_t>(index)].outside = out_child;
    return index;
  }

  Halfplane facet_plane(const Fragment& f) const {
    return w_.obstacles[static_cast<std::size_t>(f.obstacle)].edge_halfplane(static_cast<std::size_t>(f.facet));
  }

 private:
  const Fragment& choose(const std::vector<Fragment>& frags) const {
    const Fragment* best = nullptr;
    std::size_t best_splits = 0;
    for (const auto& f : frags) {
      if (best && std::tie(f.obstacle, f.facet) == std::tie(best->obstacle, best->facet)) continue;
      const Halfplane h = facet_plane(f);
      std::size_t splits = 0;
      for (const auto& g : frags) {
        if (crosses(h, g)) ++splits;
      }
      if (!best || splits < best_splits ||
          (splits == best_splits && std::tie(f.obstacle, f.facet) < std::tie(best->obstacle, best->facet))) {
        best = &f;
        best_splits = splits;
      }
    }
    return *best;
  }

  const Workspace& w_;
};

struct Span {
  double lo;
  double hi;
};

std::vector<Segment> free_portions(const Segment& chord, Point2 normal, const Workspace& w) {
  const double len = chord.length();
  std::vector<Span> blocked;
  const Point2 shift = normal * kBoundaryNudge;
  const Segment probes[3] = {chord, {chord.a + shift, chord.b + shift}, {chord.a - shift, chord.b - shift}};
  for (const auto& obs : w.obstacles) {
    for (const auto& probe : probes) {
      if (auto iv = segment_polygon_interval(probe, obs)) blocked.push_back({iv->first, iv->second});
    }
  }
  std::sort(blocked.begin(), blocked.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });

  std::vector<Span> open;
  double cursor = 0.0;
  for (const auto& b : blocked) {
    if (b.lo > cursor) open.push_back({cursor, b.lo});
    cursor = std::max(cursor, b.hi);
  }
  if (cursor < 1.0) open.push_back({cursor, 1.0});

  std::vector<Segment> out;
  const double trim = kBoundaryNudge / len;
  for (const auto& s : open) {
    const double lo = s.lo + trim;
    const double hi = s.hi - trim;
    if ((hi - lo) * len < kMinBoundaryLength) continue;
    Segment seg{chord.at(lo), chord.at(hi)};
    if (!point_in_free_space(seg.a, w) || !point_in_free_space(seg.b, w) ||
        !point_in_free_space(seg.mid(), w) || segment_collides(seg, w)) {
      continue;
    }
    out.push_back(seg);
  }
  return out;
}

}  // namespace

int BspTree::locate_node(Point2 p) const {
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const BspNode& n = nodes_[static_cast<std::size_t>(i)];
    i = n.plane->signed_distance(p) <= 0.0 ? n.inside : n.outside;
  }
  return i;
}

int BspTree::locate_free_cell(Point2 p) const {
  if (!workspace_.bounds.contains(p)) return -1;
  return nodes_[static_cast<std::size_t>(locate_node(p))].free_index;
}

BspTree build_bsp(const Workspace& w) {
  w.validate();
  BspTree t;
  t.workspace_ = w;

  std::vector<Fragment> frags;
  for (std::size_t o = 0; o < w.obstacles.size(); ++o) {
    const auto& obs = w.obstacles[o];
    for (std::size_t f = 0; f < obs.size(); ++f) {
      const Segment e = obs.edge(f);
      frags.push_back({e.a, e.b, static_cast<int>(o), static_cast<int>(f)});
    }
  }
  Builder builder(t.workspace_);
  builder.build(ConvexPolygon::from_box(w.bounds), std::move(frags), t.nodes_, t.free_leaves_);

  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const BspNode& n = t.nodes_[i];
    if (n.is_leaf()) continue;
    const auto chord = clip_halfplane_to_cell(*n.plane, n.cell);
    if (!chord) continue;
    for (const auto& seg : free_portions(*chord, n.plane->normal, w)) {
      t.free_boundaries_.push_back({seg, static_cast<int>(i)});
    }
  }
  return t;
}

std::vector<ConvexPolygon> leaf_cells(const BspTree& t) {
  std::vector<ConvexPolygon> out;
  out.reserve(t.free_leaves().size());
  for (int i : t.free_leaves()) out.push_back(t.nodes()[static_cast<std::size_t>(i)].cell);
  return out;
}

std::vector<Segment> free_boundary_segments(const BspTree& t) {
  std::vector<Segment> out;
  out.reserve(t.free_boundaries().size());
  for (const auto& b : t.free_boundaries()) out.push_back(b.segment);
  return out;
}

}  // namespace bspplan
