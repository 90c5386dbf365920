#include "bspplan/io/json_io.hpp"

#include <fstream>
#include <sstream>

namespace bspplan::io {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadInput, std::string(what) + ": " + e.what());
  }
}

json point(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::BadInput, "a point must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json polygon(const std::vector<Point2>& vs) {
  json out = json::array();
  for (Point2 p : vs) out.push_back(point(p));
  return out;
}

json tree_node(const BspTree& t, int index) {
  const BspNode& n = t.nodes()[static_cast<std::size_t>(index)];
  if (n.is_leaf()) return {{"cell", polygon(n.cell.vertices())}, {"free", n.status == LeafStatus::Free}};
  return {{"plane", json::array({n.plane->normal.x, n.plane->normal.y, n.plane->offset})},
          {"inside", tree_node(t, n.inside)},
          {"outside", tree_node(t, n.outside)}};
}

json matrix_rows(const learning::Matrix& w) {
  json flat = json::array();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
  }
  return flat;
}

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

json workspace_to_json(const Workspace& w) {
  json obs = json::array();
  for (const auto& o : w.obstacles) obs.push_back(polygon(o.vertices()));
  return {{"bounds", json::array({w.bounds.xmin, w.bounds.ymin, w.bounds.xmax, w.bounds.ymax})}, {"obstacles", obs}};
}

Workspace workspace_from_json(const json& j) {
  Workspace w = guarded("workspace", [&] {
    Workspace out;
    const auto b = doubles(j.at("bounds"));
    if (b.size() != 4) throw Error(ErrorKind::BadInput, "bounds must be [xmin, ymin, xmax, ymax]");
    out.bounds = {b[0], b[1], b[2], b[3]};
    if (j.contains("obstacles")) {
      for (const auto& o : j.at("obstacles")) {
        std::vector<Point2> vs;
        for (const auto& p : o) vs.push_back(point_from(p));
        out.obstacles.push_back(ConvexPolygon::from_vertices(std::move(vs)));
      }
    }
    return out;
  });
  w.validate();
  return w;
}

json robot_to_json(const Robot& r) {
  if (!r.is_arm()) return {{"type", "point"}};
  const PlanarArm& a = r.arm();
  return {{"type", "arm"}, {"base", point(a.base)}, {"links", a.link_lengths}, {"width", a.link_width}};
}

Robot robot_from_json(const json& j) {
  return guarded("robot", [&]() -> Robot {
    const auto type = j.at("type").get<std::string>();
    if (type == "point") return PointRobot{};
    if (type != "arm") throw Error(ErrorKind::BadInput, "unknown robot type '" + type + "'");
    PlanarArm a{point_from(j.at("base")), doubles(j.at("links")), j.value("width", 0.02)};
    a.validate();
    return a;
  });
}

json configuration_to_json(const Configuration& q) { return q.values; }

Configuration configuration_from_json(const json& j) {
  return guarded("configuration", [&] { return Configuration{doubles(j)}; });
}

json path_to_json(const Path& p) {
  json qs = json::array();
  for (const auto& q : p.configurations) qs.push_back(q.values);
  return {{"configurations", qs}, {"cost", p.cost}};
}

Path path_from_json(const json& j) {
  return guarded("path", [&] {
    Path p;
    for (const auto& q : j.at("configurations")) p.configurations.push_back(Configuration{doubles(q)});
    p.cost = j.at("cost").get<double>();
    return p;
  });
}

json tree_to_json(const BspTree& t) { return tree_node(t, 0); }

json graph_to_json(const ConnectivityGraph& g) {
  json nodes = json::array();
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    json n = {{"id", i}, {"position", point(g.positions[i])}};
    if (i >= 2) {
      const auto& c = g.candidates[i - 2];
      n["boundary"] = c.boundary_index;
      n["cells"] = json::array({c.cell_a, c.cell_b});
    }
    nodes.push_back(n);
  }
  json edges = json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    edges.push_back({{"u", g.edges[e].u},
                     {"v", g.edges[e].v},
                     {"weight", g.edges[e].weight},
                     {"removed", g.is_removed(static_cast<int>(e))}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

json plan_result_to_json(const PlanResult& r) {
  json j = {{"status", r.status == PlanStatus::Success ? "success" : "timeout"},
            {"iterations", r.iterations},
            {"samples_drawn", r.samples_drawn},
            {"valid_samples", r.valid_samples},
            {"first_solution_iteration", r.first_solution_iteration},
            {"checks_to_first_solution", r.checks_to_first_solution},
            {"collision_checks", r.collision_checks}};
  if (r.path) j["path"] = path_to_json(*r.path);
  return j;
}

json mlp_to_json(const learning::Mlp& m) {
  json layers = json::array();
  for (std::size_t k = 0; k < m.layer_count(); ++k) {
    layers.push_back({{"w", matrix_rows(m.weight(k))}, {"b", std::vector<double>(m.bias(k).data(), m.bias(k).data() + m.bias(k).size())}});
  }
  return {{"arch", m.sizes()}, {"layers", layers}};
}

learning::Mlp mlp_from_json(const json& j) {
  return guarded("network", [&] {
    const auto sizes = j.at("arch").get<std::vector<int>>();
    const auto& layers = j.at("layers");
    if (sizes.size() < 2 || layers.size() + 1 != sizes.size()) {
      throw Error(ErrorKind::DimensionMismatch, "layer count does not match architecture");
    }
    std::vector<learning::Matrix> ws;
    std::vector<learning::Vector> bs;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto w = doubles(layers[k].at("w"));
      const auto b = doubles(layers[k].at("b"));
      const int rows = sizes[k + 1];
      const int cols = sizes[k];
      if (w.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) || b.size() != static_cast<std::size_t>(rows)) {
        throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(k) + " shape does not match architecture");
      }
      learning::Matrix m(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
      ws.push_back(std::move(m));
      bs.push_back(Eigen::Map<const learning::Vector>(b.data(), rows));
    }
    return learning::Mlp(sizes, std::move(ws), std::move(bs));
  });
}

json cvae_to_json(const learning::CvaeModel& m) {
  return {{"type", "cvae"},          {"latent_dim", m.latent_dim}, {"cond_dim", m.cond_dim},
          {"x_dim", m.x_dim},        {"x_lower", m.x_lower},       {"x_upper", m.x_upper},
          {"data_scale", m.data_scale}, {"angular", m.angular},    {"encoder", mlp_to_json(m.encoder)},
          {"decoder", mlp_to_json(m.decoder)}};
}

learning::CvaeModel cvae_from_json(const json& j) {
  return guarded("cvae model", [&] {
    learning::CvaeModel m;
    m.latent_dim = j.at("latent_dim").get<int>();
    m.cond_dim = j.at("cond_dim").get<int>();
    m.x_dim = j.at("x_dim").get<int>();
    m.x_lower = doubles(j.at("x_lower"));
    m.x_upper = doubles(j.at("x_upper"));
    m.data_scale = j.at("data_scale").get<double>();
    m.angular = j.at("angular").get<bool>();
    m.encoder = mlp_from_json(j.at("encoder"));
    m.decoder = mlp_from_json(j.at("decoder"));
    if (m.encoder.input_size() != m.x_dim + m.cond_dim || m.encoder.output_size() != 2 * m.latent_dim ||
        m.decoder.input_size() != m.latent_dim + m.cond_dim || m.decoder.output_size() != m.x_dim ||
        m.x_lower.size() != static_cast<std::size_t>(m.x_dim) || m.x_upper.size() != static_cast<std::size_t>(m.x_dim)) {
      throw Error(ErrorKind::DimensionMismatch, "cvae networks do not match the declared dimensions");
    }
    return m;
  });
}

json keypoint_net_to_json(const learning::KeypointNet& n) {
  json j = mlp_to_json(n.mlp);
  j["type"] = "keypoint_net";
  j["grid"] = n.grid;
  j["cond_dim"] = n.mlp.input_size();
  return j;
}

learning::KeypointNet keypoint_net_from_json(const json& j) {
  return guarded("keypoint model", [&] {
    learning::KeypointNet n{mlp_from_json(j), j.at("grid").get<int>()};
    if (n.mlp.input_size() != learning::Conditioner::dimension(n.grid) || n.mlp.output_size() != 2) {
      throw Error(ErrorKind::DimensionMismatch, "keypoint network does not match its encoding grid");
    }
    return n;
  });
}

json record_to_json(const DatasetRecord& r) {
  json paths = json::array();
  for (const auto& p : r.paths) paths.push_back(path_to_json(p));
  return {{"env_seed", r.env_seed},
          {"collect_seed", r.collect_seed},
          {"robot", robot_to_json(r.robot)},
          {"workspace", workspace_to_json(r.workspace)},
          {"start", r.start.values},
          {"target", r.target.values},
          {"keypoints", polygon(r.keypoints)},
          {"paths", paths}};
}

DatasetRecord record_from_json(const json& j) {
  return guarded("dataset record", [&] {
    DatasetRecord r;
    r.env_seed = j.at("env_seed").get<std::uint64_t>();
    r.collect_seed = j.at("collect_seed").get<std::uint64_t>();
    r.robot = robot_from_json(j.at("robot"));
    r.workspace = workspace_from_json(j.at("workspace"));
    r.start = configuration_from_json(j.at("start"));
    r.target = configuration_from_json(j.at("target"));
    for (const auto& p : j.at("keypoints")) r.keypoints.push_back(point_from(p));
    for (const auto& p : j.at("paths")) r.paths.push_back(path_from_json(p));
    return r;
  });
}

void write_dataset(const std::filesystem::path& file, const std::vector<DatasetRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  write_text_file(file, out.str());
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + file.string());
  std::vector<DatasetRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = guarded("dataset line", [&] { return json::parse(line); });
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.kind(), file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + file.string());
  return guarded(file.string().c_str(), [&] { return json::parse(in); });
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + file.string());
}

}  // namespace bspplan::io
