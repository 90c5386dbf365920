#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "bspplan/io/config.hpp"
#include "bspplan/io/json_io.hpp"
#include "bspplan/pipeline/benchmark.hpp"
#include "bspplan/pipeline/offline.hpp"
#include "bspplan/pipeline/svg.hpp"

using namespace bspplan;
using nlohmann::json;

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitBadInput = 3;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Infeasible:
    case ErrorKind::NoPath:
    case ErrorKind::NoTermination:
    case ErrorKind::Unreachable:
      return kExitInfeasible;
    case ErrorKind::TrainingDiverged:
    case ErrorKind::GenerationFailed:
    case ErrorKind::InsufficientData:
    case ErrorKind::EmptyDataset:
    case ErrorKind::NoForwardRecorded:
      return 1;
    default:
      return kExitBadInput;
  }
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

json config_or_empty(const std::string& file) { return file.empty() ? json::object() : io::read_json_file(file); }

std::optional<Point2> point_opt(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return Point2{v[0], v[1]};
}

Configuration config_from(const std::vector<double>& cli, const json& env, const char* key) {
  if (!cli.empty()) return Configuration{cli};
  if (env.contains(key)) return io::configuration_from_json(env.at(key));
  throw Error(ErrorKind::BadInput, std::string("missing --") + key + " (and no '" + key + "' in the environment file)");
}

void print(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_text_file(out, j.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keypoint-guided sampling for motion planning"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random maze environment");
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_config;
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--config", gen_config, "maze config JSON");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // decompose
  auto* dec = app.add_subcommand("decompose", "Partition a workspace and build the keypoint graph");
  std::string dec_env, dec_tree, dec_graph, dec_svg;
  int dec_res = 3;
  std::vector<double> dec_start, dec_goal;
  dec->add_option("--env", dec_env, "workspace JSON")->required();
  dec->add_option("--resolution", dec_res);
  dec->add_option("--tree", dec_tree, "write the partition tree JSON");
  dec->add_option("--graph", dec_graph, "write the keypoint graph JSON (needs --start/--goal)");
  dec->add_option("--svg", dec_svg, "render the decomposition");
  dec->add_option("--start", dec_start)->expected(2);
  dec->add_option("--goal", dec_goal)->expected(2);

  // collect
  auto* col = app.add_subcommand("collect", "Collect keypoint/path training data on generated mazes");
  int col_envs = 0;
  std::uint64_t col_seed = 0;
  std::string col_out, col_config;
  col->add_option("--envs", col_envs)->required();
  col->add_option("--seed", col_seed, "first maze seed")->required();
  col->add_option("--out", col_out)->required();
  col->add_option("--config", col_config, "offline config JSON");

  // train
  auto* tr = app.add_subcommand("train", "Train the keypoint network and the CVAE");
  std::string tr_data, tr_out, tr_config;
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--out-dir", tr_out)->required();
  tr->add_option("--config", tr_config, "offline config JSON");

  // plan
  auto* pl = app.add_subcommand("plan", "Plan one problem");
  std::string pl_env, pl_robot, pl_planner = "rrtstar", pl_sampler = "uniform", pl_models, pl_out;
  std::vector<double> pl_start, pl_goal;
  std::uint64_t pl_seed = 0;
  int pl_iters = 3000;
  double pl_lambda = 0.5;
  pl->add_option("--env", pl_env, "workspace JSON (may also carry start/goal)")->required();
  pl->add_option("--robot", pl_robot, "robot JSON (default point)");
  pl->add_option("--start", pl_start);
  pl->add_option("--goal", pl_goal);
  pl->add_option("--planner", pl_planner)->check(CLI::IsMember({"rrt", "rrtstar"}));
  pl->add_option("--sampler", pl_sampler)->check(CLI::IsMember({"uniform", "mixture"}));
  pl->add_option("--models", pl_models, "model directory for --sampler mixture");
  pl->add_option("--lambda", pl_lambda);
  pl->add_option("--seed", pl_seed);
  pl->add_option("--iters", pl_iters);
  pl->add_option("--out", pl_out, "result JSON (default stdout)");

  // bench
  auto* be = app.add_subcommand("bench", "Compare samplers on held-out mazes");
  std::string be_config, be_out, be_timing;
  be->add_option("--config", be_config)->required();
  be->add_option("--out", be_out)->required();
  be->add_option("--timing", be_timing, "write wall-clock times to a separate JSON file");

  // plot
  auto* pt = app.add_subcommand("plot", "Render a scene to SVG");
  std::string pt_scene, pt_out;
  pt->add_option("--scene", pt_scene, "scene JSON")->required();
  pt->add_option("--out", pt_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*gen) {
      MazeConfig mc;
      if (!gen_config.empty()) io::apply(mc, io::read_json_file(gen_config));
      const MazeInstance m = generate_maze(gen_seed, mc);
      json j = io::workspace_to_json(m.workspace);
      j["start"] = json::array({m.start.x, m.start.y});
      j["goal"] = json::array({m.goal.x, m.goal.y});
      print(j, gen_out);
    } else if (*dec) {
      const json envj = io::read_json_file(dec_env);
      const Workspace w = io::workspace_from_json(envj);
      const BspTree tree = build_bsp(w);
      const auto candidates = keypoint_candidates(tree, dec_res);
      std::optional<ConnectivityGraph> graph;
      auto s = point_opt(dec_start);
      auto g = point_opt(dec_goal);
      if (!s && envj.contains("start")) s = Point2{envj["start"][0].get<double>(), envj["start"][1].get<double>()};
      if (!g && envj.contains("goal")) g = Point2{envj["goal"][0].get<double>(), envj["goal"][1].get<double>()};
      if (s && g) graph = build_connectivity_graph(tree, candidates, *s, *g);
      if (!dec_tree.empty()) io::write_text_file(dec_tree, io::tree_to_json(tree).dump(2) + "\n");
      if (!dec_graph.empty()) {
        if (!graph) throw Error(ErrorKind::BadInput, "--graph needs a start and a goal");
        io::write_text_file(dec_graph, io::graph_to_json(*graph).dump(2) + "\n");
      }
      if (!dec_svg.empty()) {
        SvgScene scene;
        scene.workspace = w;
        scene.tree = &tree;
        if (graph) scene.graph = &*graph;
        scene.start = s;
        scene.goal = g;
        if (graph) {
          try {
            scene.keypoints = shortest_keypoint_sequence(*graph).points;
          } catch (const Error&) {
          }
        }
        emit_svg(scene, dec_svg);
      }
      std::cout << "free cells " << tree.free_leaves().size() << " free boundaries "
                << tree.free_boundaries().size() << " candidates " << candidates.size() << '\n';
    } else if (*col) {
      OfflineConfig oc;
      io::apply(oc, config_or_empty(col_config));
      const auto out = collect_mazes(seed_range(col_seed, col_envs), oc.maze, oc.collect, oc.workers);
      io::write_dataset(col_out, out.records);
      std::cout << "records " << out.records.size() << " skipped " << out.skipped_seeds.size() << '\n';
      if (out.records.empty()) return kExitInfeasible;
    } else if (*tr) {
      OfflineConfig oc;
      io::apply(oc, config_or_empty(tr_config));
      oc.model_dir = tr_out;
      const auto res = train_models(io::read_dataset(tr_data), oc);
      json hist = {{"cvae_epoch_loss", res.cvae_history.epoch_loss},
                   {"keypoint_epoch_loss", res.keypoint_history.epoch_loss}};
      io::write_text_file(std::filesystem::path(tr_out) / "history.json", hist.dump(2) + "\n");
      std::cout << "cvae loss " << res.cvae_history.epoch_loss.front() << " -> " << res.cvae_history.epoch_loss.back()
                << ", keypoint loss " << res.keypoint_history.epoch_loss.front() << " -> "
                << res.keypoint_history.epoch_loss.back() << '\n';
    } else if (*pl) {
      const json envj = io::read_json_file(pl_env);
      const Workspace w = io::workspace_from_json(envj);
      const Robot robot = pl_robot.empty() ? Robot{PointRobot{}} : io::robot_from_json(io::read_json_file(pl_robot));
      PlanningProblem p{robot, w, config_from(pl_start, envj, "start"), config_from(pl_goal, envj, "goal"),
                        default_goal_radius(robot, w)};
      PlannerParams params = PlannerParams::defaults_for(robot, w);
      params.seed = pl_seed;
      params.max_iters = pl_iters;
      std::optional<LearnedModels> models;
      std::unique_ptr<SampleSource> sampler;
      json extra = json::object();
      if (pl_sampler == "mixture") {
        if (pl_models.empty()) throw Error(ErrorKind::MissingModel, "--sampler mixture needs --models");
        models = load_models(pl_models);
        OnlinePlan op = online_execute(*models, p, {pl_lambda});
        json kps = json::array();
        for (Point2 k : op.keypoints) kps.push_back({k.x, k.y});
        extra["keypoints"] = kps;
        sampler = std::make_unique<MixtureSampler>(std::move(op.sampler));
      } else {
        sampler = std::make_unique<UniformSampler>(robot, w);
      }
      const PlanResult r = pl_planner == "rrt" ? plan_rrt(p, *sampler, params) : plan_rrt_star(p, *sampler, params);
      json j = io::plan_result_to_json(r);
      j.update(extra);
      print(j, pl_out);
      if (r.status != PlanStatus::Success) return kExitInfeasible;
    } else if (*be) {
      const json cfg = io::read_json_file(be_config);
      BenchmarkConfig bc;
      io::apply(bc, cfg, {"models", "dataset", "heldout_first", "heldout_count"});
      if (cfg.contains("heldout_first")) {
        bc.env_seeds = seed_range(cfg.at("heldout_first").get<std::uint64_t>(), cfg.value("heldout_count", 20));
      }
      std::optional<LearnedModels> models;
      if (cfg.contains("models")) models = load_models(cfg.at("models").get<std::string>());
      std::optional<std::vector<DatasetRecord>> records;
      if (cfg.contains("dataset")) records = io::read_dataset(cfg.at("dataset").get<std::string>());
      const BenchmarkReport rep = run_benchmark(bc, models ? &*models : nullptr, records ? &*records : nullptr);
      io::write_text_file(be_out, rep.to_json().dump(2) + "\n");
      if (!be_timing.empty()) io::write_text_file(be_timing, rep.timing_json().dump(2) + "\n");
      for (const auto& s : rep.summaries) {
        std::cout << s.sampler << " budget " << s.budget << " success " << s.success_rate << " valid "
                  << s.mean_valid_fraction << '\n';
      }
    } else if (*pt) {
      const json sj = io::read_json_file(pt_scene);
      SvgScene scene;
      scene.workspace = io::workspace_from_json(sj.contains("workspace") ? sj.at("workspace") : sj);
      std::optional<BspTree> tree;
      std::optional<ConnectivityGraph> graph;
      auto pts = [](const json& a) {
        std::vector<Point2> out;
        for (const auto& p : a) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        return out;
      };
      try {
        if (sj.contains("start")) scene.start = pts(json::array({sj["start"]})).front();
        if (sj.contains("goal")) scene.goal = pts(json::array({sj["goal"]})).front();
        if (sj.contains("keypoints")) scene.keypoints = pts(sj["keypoints"]);
        if (sj.contains("samples")) scene.samples = pts(sj["samples"]);
        if (sj.contains("paths")) {
          for (const auto& p : sj["paths"]) scene.paths.push_back(pts(p));
        }
      } catch (const json::exception& e) {
        throw Error(ErrorKind::BadInput, std::string("scene: ") + e.what());
      }
      if (sj.value("tree", false) || sj.value("graph", false)) {
        tree = build_bsp(scene.workspace);
        scene.tree = &*tree;
      }
      if (sj.value("graph", false) && scene.start && scene.goal) {
        graph = build_connectivity_graph(*tree, keypoint_candidates(*tree, sj.value("resolution", 3)), *scene.start, *scene.goal);
        scene.graph = &*graph;
      }
      emit_svg(scene, pt_out);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
