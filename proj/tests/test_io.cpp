#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bspplan/io/config.hpp"
#include "bspplan/io/json_io.hpp"
#include "bspplan/pipeline/offline.hpp"
#include "support.hpp"

using namespace bspplan;
using namespace testsupport;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bspplan_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <class F>
ErrorKind kind_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::BadInput;
}

}  // namespace

TEST_CASE("workspace JSON round-trips doubles exactly") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Workspace w = random_world(rng, 4);
    const std::string text = io::workspace_to_json(w).dump();
    const Workspace back = io::workspace_from_json(json::parse(text));
    CHECK(back == w);
  }
  const json j = json::parse(R"({"bounds":[0,0,1,1],"obstacles":[[[0.1,0.1],[0.30000000000000004,0.1],[0.2,0.3]]]})");
  const Workspace w = io::workspace_from_json(j);
  CHECK(w.obstacles[0].vertices()[1].x == 0.30000000000000004);
}

TEST_CASE("malformed inputs are BadInput") {
  CHECK(kind_of([] { io::workspace_from_json(json::parse(R"({"bounds":[0,0,1]})")); }) == ErrorKind::BadInput);
  CHECK(kind_of([] { io::workspace_from_json(json::parse(R"({"bounds":"x","obstacles":[]})")); }) == ErrorKind::BadInput);
  CHECK(kind_of([] { io::robot_from_json(json::parse(R"({"type":"snake"})")); }) == ErrorKind::BadInput);
  const fs::path dir = scratch("bad");
  {
    std::ofstream(dir / "broken.json") << "{ not json";
  }
  CHECK(kind_of([&] { io::read_json_file(dir / "broken.json"); }) == ErrorKind::BadInput);
  CHECK(kind_of([&] { io::read_json_file(dir / "absent.json"); }) == ErrorKind::IoFailure);
  // An obstacle outside the bounds parses but fails validation.
  CHECK_THROWS_AS(io::workspace_from_json(json::parse(R"({"bounds":[0,0,1,1],"obstacles":[[[2,2],[3,2],[3,3]]]})")), Error);
}

TEST_CASE("robot, configuration and path JSON") {
  const Robot arm(PlanarArm{{0.5, 0.35}, {0.22, 0.3, 0.28}, 0.02});
  CHECK(io::robot_from_json(io::robot_to_json(arm)) == arm);
  const Robot point(PointRobot{});
  CHECK(io::robot_from_json(io::robot_to_json(point)) == point);
  const Configuration q{0.1, -2.0000000000000004, 3.14159};
  CHECK(io::configuration_from_json(json::parse(io::configuration_to_json(q).dump())) == q);
  const Path p = make_path(point, {{0.1, 0.1}, {0.2, 0.35}});
  const Path back = io::path_from_json(json::parse(io::path_to_json(p).dump()));
  CHECK(back.configurations == p.configurations);
  CHECK(back.cost == p.cost);
}

TEST_CASE("tree and graph dumps") {
  const MazeInstance m = generate_maze(4);
  const BspTree t = build_bsp(m.workspace);
  const json tj = io::tree_to_json(t);
  CHECK(tj.contains("plane"));
  CHECK(tj["plane"].size() == 3);
  const auto g = build_connectivity_graph(t, keypoint_candidates(t, 3), m.start, m.goal);
  const json gj = io::graph_to_json(g);
  CHECK(gj.contains("edges"));
  CHECK(gj["edges"].size() == g.edges.size());
}

TEST_CASE("models round-trip") {
  learning::CvaeConfig cfg;
  cfg.hidden = {8, 4};
  const auto m = learning::make_cvae(3, 5, {-M_PI, -M_PI, -M_PI}, {M_PI, M_PI, M_PI}, true, cfg);
  CHECK(io::cvae_from_json(json::parse(io::cvae_to_json(m).dump())) == m);
  Rng rng(1);
  const learning::KeypointNet k{learning::Mlp({52, 6, 2}, rng), 4};
  CHECK(io::keypoint_net_from_json(json::parse(io::keypoint_net_to_json(k).dump())) == k);
  json broken = io::mlp_to_json(k.mlp);
  broken["layers"][0]["w"].erase(0);
  CHECK_THROWS_AS(io::mlp_from_json(broken), Error);
  broken.erase("arch");
  CHECK(kind_of([&] { io::mlp_from_json(broken); }) == ErrorKind::BadInput);
}

TEST_CASE("dataset round-trip is bit-equal") {
  std::vector<DatasetRecord> recs;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto r = collect_training_example(maze_problem(generate_maze(s)), {});
    r.env_seed = s;
    recs.push_back(r);
  }
  const ArmInstance a = generate_arm_world(7);
  const Robot arm(a.arm);
  recs.push_back(collect_training_example({arm, a.workspace, a.start, a.goal, default_goal_radius(arm, a.workspace)}, {}));
  const fs::path dir = scratch("data");
  io::write_dataset(dir / "d.jsonl", recs);
  const auto back = io::read_dataset(dir / "d.jsonl");
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(back[i] == recs[i]);
  std::ifstream in(dir / "d.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) lines += !line.empty();
  CHECK(lines == 4);
}

TEST_CASE("config overrides") {
  OfflineConfig oc;
  io::apply(oc, json::parse(R"({"cvae_envs": 7, "cvae": {"epochs": 3, "hidden": [4]}, "collect": {"resolution": 5}})"));
  CHECK(oc.cvae_envs == 7);
  CHECK(oc.cvae.epochs == 3);
  CHECK(oc.cvae.hidden == std::vector<int>{4});
  CHECK(oc.collect.resolution == 5);
  CHECK(kind_of([&] { io::apply(oc, json::parse(R"({"cvae_env": 7})")); }) == ErrorKind::BadInput);
  CHECK_THROWS_AS(io::apply(oc, json::parse(R"({"collect": {"resolution": 4}})")), Error);

  BenchmarkConfig bc;
  io::apply(bc, json::parse(R"({"runs": 4, "samplers": ["uniform"], "models": "x"})"), {"models"});
  CHECK(bc.runs == 4);
  CHECK(bc.samplers == std::vector<std::string>{"uniform"});
  CHECK(kind_of([&] { io::apply(bc, json::parse(R"({"models": "x"})")); }) == ErrorKind::BadInput);
}
