#include "bspplan/pipeline/offline.hpp"

#include <algorithm>
#include <optional>

#include "bspplan/io/json_io.hpp"
#include "bspplan/parallel.hpp"

namespace bspplan {

PlanningProblem maze_problem(const MazeInstance& m) {
  const Robot robot{PointRobot{}};
  return {robot, m.workspace, {m.start.x, m.start.y}, {m.goal.x, m.goal.y}, default_goal_radius(robot, m.workspace)};
}

CollectionOutcome collect_mazes(const std::vector<std::uint64_t>& env_seeds, const MazeConfig& maze,
                                const CollectConfig& collect, unsigned workers) {
  const auto results = parallel_map<std::optional<DatasetRecord>>(
      env_seeds.size(),
      [&](std::size_t i) -> std::optional<DatasetRecord> {
        CollectConfig c = collect;
        c.seed = derive_seed(collect.seed, env_seeds[i]);
        try {
          DatasetRecord r = collect_training_example(maze_problem(generate_maze(env_seeds[i], maze)), c);
          r.env_seed = env_seeds[i];
          return r;
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::GenerationFailed) return std::nullopt;
          throw;
        }
      },
      workers);
  CollectionOutcome out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i]) {
      out.records.push_back(*results[i]);
    } else {
      out.skipped_seeds.push_back(env_seeds[i]);
    }
  }
  return out;
}

learning::CvaeDataset build_cvae_dataset(const std::vector<DatasetRecord>& records, int grid,
                                         const ConditionJitter& jitter) {
  learning::CvaeDataset data;
  Rng rng(jitter.seed);
  for (const auto& r : records) {
    const learning::Conditioner conditioner(r.workspace, grid);
    const Box& b = r.workspace.bounds;
    const double sigma = jitter.sigma * b.diagonal();
    auto perturb = [&](Point2 p, bool fixed) {
      if (fixed) return p;
      return Point2{std::clamp(p.x + sigma * standard_normal(rng), b.xmin, b.xmax),
                    std::clamp(p.y + sigma * standard_normal(rng), b.ymin, b.ymax)};
    };
    const std::size_t n = std::min(r.paths.size(), r.keypoints.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& qs = r.paths[i].configurations;
      int c = static_cast<int>(data.conditions.size());
      data.conditions.push_back(conditioner.condition(r.keypoints[i], r.keypoints[i + 1]));
      for (const auto& q : qs) data.add(q, c);
      // The start and the goal are known exactly online; only keypoints move.
      for (int k = 0; k < jitter.copies; ++k) {
        c = static_cast<int>(data.conditions.size());
        data.conditions.push_back(
            conditioner.condition(perturb(r.keypoints[i], i == 0), perturb(r.keypoints[i + 1], i + 1 == n)));
        for (std::size_t j = static_cast<std::size_t>(k) % static_cast<std::size_t>(std::max(1, jitter.stride));
             j < qs.size(); j += static_cast<std::size_t>(std::max(1, jitter.stride))) {
          data.add(qs[j], c);
        }
      }
    }
  }
  return data;
}

DatasetRecord mirror_record(const DatasetRecord& r) {
  const Box& b = r.workspace.bounds;
  auto reflect = [&](Point2 p) { return Point2{b.xmin + b.xmax - p.x, p.y}; };
  DatasetRecord m;
  m.env_seed = r.env_seed;
  m.collect_seed = r.collect_seed;
  m.robot = r.robot;
  m.workspace.bounds = b;
  for (const auto& o : r.workspace.obstacles) {
    std::vector<Point2> vs;
    for (Point2 p : o.vertices()) vs.push_back(reflect(p));
    m.workspace.obstacles.push_back(ConvexPolygon::from_vertices(std::move(vs)));
  }
  for (Point2 k : r.keypoints) m.keypoints.push_back(reflect(k));
  return m;
}

std::vector<learning::KeypointExample> build_keypoint_dataset(const std::vector<DatasetRecord>& records, int grid,
                                                              bool mirror) {
  std::vector<learning::KeypointExample> out;
  auto add = [&](const DatasetRecord& r) {
    const learning::Conditioner conditioner(r.workspace, grid);
    const auto ex = learning::unroll_sequence(conditioner, r.workspace.bounds, r.keypoints);
    out.insert(out.end(), ex.begin(), ex.end());
  };
  for (const auto& r : records) {
    add(r);
    if (mirror) add(mirror_record(r));
  }
  return out;
}

OfflineResult train_models(std::vector<DatasetRecord> records, const OfflineConfig& config) {
  if (records.size() < static_cast<std::size_t>(std::max(1, config.min_records))) {
    throw Error(ErrorKind::InsufficientData, std::to_string(records.size()) + " records, need " +
                                                 std::to_string(config.min_records));
  }
  OfflineResult out;
  const DatasetRecord& first = records.front();
  const std::size_t n_cvae = std::min(records.size(), static_cast<std::size_t>(std::max(1, config.cvae_envs)));
  const std::vector<DatasetRecord> cvae_records(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n_cvae));

  learning::KeypointNetConfig kc = config.keypoint;
  out.models.keypoint = learning::train_keypoint_net(build_keypoint_dataset(records, kc.grid, kc.mirror), kc, &out.keypoint_history);
  out.models.cvae = learning::train_cvae(build_cvae_dataset(cvae_records, kc.grid, config.jitter), static_cast<int>(first.robot.dim()),
                                         first.robot.lower(first.workspace), first.robot.upper(first.workspace),
                                         first.robot.is_arm(), config.cvae, &out.cvae_history);
  out.records = std::move(records);
  if (!config.model_dir.empty()) save_models(out.models, config.model_dir);
  return out;
}

OfflineResult offline_learning(const std::vector<std::uint64_t>& env_seeds, const OfflineConfig& config) {
  if (env_seeds.empty()) throw Error(ErrorKind::InvalidParams, "no environment seeds");
  std::vector<DatasetRecord> records;
  std::vector<std::uint64_t> skipped;
  bool reused = false;
  if (!config.dataset_path.empty() && std::filesystem::exists(config.dataset_path)) {
    records = io::read_dataset(config.dataset_path);
    reused = true;
  } else {
    auto c = collect_mazes(env_seeds, config.maze, config.collect, config.workers);
    records = std::move(c.records);
    skipped = std::move(c.skipped_seeds);
    if (!config.dataset_path.empty()) io::write_dataset(config.dataset_path, records);
  }
  OfflineResult out = train_models(std::move(records), config);
  out.reused_dataset = reused;
  out.skipped_seeds = std::move(skipped);
  return out;
}

void save_models(const LearnedModels& models, const std::filesystem::path& dir) {
  io::write_text_file(dir / "cvae.json", io::cvae_to_json(models.cvae).dump());
  io::write_text_file(dir / "keypoint.json", io::keypoint_net_to_json(models.keypoint).dump());
}

LearnedModels load_models(const std::filesystem::path& dir) {
  for (const char* f : {"cvae.json", "keypoint.json"}) {
    if (!std::filesystem::exists(dir / f)) throw Error(ErrorKind::MissingModel, "missing " + (dir / f).string());
  }
  return {io::keypoint_net_from_json(io::read_json_file(dir / "keypoint.json")),
          io::cvae_from_json(io::read_json_file(dir / "cvae.json"))};
}

}  // namespace bspplan
