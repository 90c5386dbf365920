#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bspplan/bsp.hpp"
#include "bspplan/keypoint_graph.hpp"
#include "bspplan/robots.hpp"

namespace bspplan {

struct SvgScene {
  Workspace workspace;
  const BspTree* tree = nullptr;
  const ConnectivityGraph* graph = nullptr;
  std::vector<Point2> keypoints;
  std::vector<Point2> samples;
  /// Workspace polylines (robot paths already mapped to the workspace).
  std::vector<std::vector<Point2>> paths;
  std::optional<Point2> start;
  std::optional<Point2> goal;
  int pixels = 600;
};

/// Obstacles filled, partition boundaries dashed, graph edges thin, then
/// samples, paths, keypoints, start and goal. Byte-identical for equal scenes.
std::string render_svg(const SvgScene& scene);

/// Writes render_svg to a file. Throws IoFailure.
void emit_svg(const SvgScene& scene, const std::filesystem::path& file);

}  // namespace bspplan
