#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bspplan/bsp.hpp"
#include "bspplan/io/json_io.hpp"
#include "bspplan/keypoint_graph.hpp"
#include "bspplan/learning/cvae.hpp"
#include "bspplan/pipeline/benchmark.hpp"
#include "bspplan/pipeline/offline.hpp"
#include "support.hpp"

using namespace bspplan;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(limit_seconds)) + " s limit";
  }
  failures += !o.pass;
  std::ostringstream line;
  line.precision(3);
  line << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << " (" << std::fixed << secs
       << " s): " << o.detail;
  std::cout << line.str() << std::endl;
}

std::vector<std::uint64_t> seeds(std::uint64_t first, int n) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < n; ++i) s.push_back(first + static_cast<std::uint64_t>(i));
  return s;
}

double plane_distance(const BspTree& t, Point2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& n : t.nodes()) {
    if (n.plane) d = std::min(d, std::abs(n.plane->signed_distance(p)));
  }
  return d;
}

Outcome geometry_suite() {
  Rng rng(1);
  int tiling = 0, freeness = 0, area = 0, crossing = 0, skipped = 0;
  double worst_area = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const MazeInstance m = generate_maze(seed);
    const BspTree t = build_bsp(m.workspace);
    std::vector<const ConvexPolygon*> leaves;
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) leaves.push_back(&n.cell);
    }
    for (int i = 0; i < 10000; ++i) {
      const Point2 p = random_point(rng, m.workspace.bounds);
      if (plane_distance(t, p) < 1e-12) {
        ++skipped;
        continue;
      }
      int hits = 0;
      for (const auto* c : leaves) hits += c->contains(p);
      tiling += hits != 1;
    }
    for (const auto& c : leaf_cells(t)) {
      const Box bb = c.bounding_box();
      int got = 0;
      for (int tries = 0; got < 1000 && tries < 1000000; ++tries) {
        const Point2 p = random_point(rng, bb);
        if (!c.contains(p) || plane_distance(t, p) < 1e-12) continue;
        ++got;
        freeness += !point_in_free_space(p, m.workspace);
      }
      freeness += got < 1000;
    }
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) continue;
      const double a = t.nodes()[static_cast<std::size_t>(n.inside)].cell.area() +
                       t.nodes()[static_cast<std::size_t>(n.outside)].cell.area();
      const double rel = std::abs(a - n.cell.area()) / n.cell.area();
      worst_area = std::max(worst_area, rel);
      area += rel > 1e-9;
    }
    const auto segs = free_boundary_segments(t);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (std::size_t j = i + 1; j < segs.size(); ++j) crossing += segments_cross(segs[i], segs[j], 1e-9);
    }
  }
  std::ostringstream d;
  d << "tiling violations " << tiling << ", non-free samples " << freeness << ", area violations " << area
    << " (worst " << worst_area << "), crossings " << crossing << ", on-plane points skipped " << skipped;
  return {tiling == 0 && freeness == 0 && area == 0 && crossing == 0, d.str()};
}

double exhaustive_min(const ConnectivityGraph& g) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> seen(g.node_count(), false);
  std::function<void(int, double)> dfs = [&](int u, double acc) {
    if (u == ConnectivityGraph::kGoal) {
      best = std::min(best, acc);
      return;
    }
    seen[static_cast<std::size_t>(u)] = true;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& ed = g.edges[e];
      const int v = ed.u == u ? ed.v : ed.v == u ? ed.u : -1;
      if (v >= 0 && !seen[static_cast<std::size_t>(v)]) dfs(v, acc + ed.weight);
    }
    seen[static_cast<std::size_t>(u)] = false;
  };
  dfs(ConnectivityGraph::kStart, 0.0);
  return best;
}

Outcome dijkstra_oracle() {
  Rng rng(2);
  int mismatches = 0, disconnected = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(uniform01(rng) * 9);
    ConnectivityGraph g;
    for (int i = 0; i < n; ++i) g.positions.push_back({static_cast<double>(i), 0.0});
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (uniform01(rng) < 0.4) g.edges.push_back({u, v, uniform(rng, 0.1, 10.0)});
      }
    }
    const double oracle = exhaustive_min(g);
    if (std::isinf(oracle)) {
      ++disconnected;
      try {
        shortest_keypoint_sequence(g);
        ++mismatches;
      } catch (const Error&) {
      }
    } else {
      mismatches += shortest_keypoint_sequence(g).cost != oracle;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 100 graphs (" +
                               std::to_string(disconnected) + " without a path)"};
}

learning::Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  learning::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

std::vector<double> numeric_grad(learning::Mlp& net, const std::function<double()>& f) {
  const double h = 1e-5;
  std::vector<double> g;
  auto probe = [&](double& p) {
    const double old = p;
    p = old + h;
    const double up = f();
    p = old - h;
    const double down = f();
    p = old;
    g.push_back((up - down) / (2 * h));
  };
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    for (Eigen::Index i = 0; i < net.weight(k).size(); ++i) probe(net.weight(k).data()[i]);
    for (Eigen::Index i = 0; i < net.bias(k).size(); ++i) probe(net.bias(k)[i]);
  }
  return g;
}

std::vector<double> flatten(const learning::MlpGradients& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    out.insert(out.end(), g.weights[k].data(), g.weights[k].data() + g.weights[k].size());
    out.insert(out.end(), g.biases[k].data(), g.biases[k].data() + g.biases[k].size());
  }
  return out;
}

Outcome gradient_check() {
  Rng rng(3);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    learning::CvaeConfig cfg;
    cfg.hidden = {12, 9};
    cfg.latent_dim = 3;
    cfg.seed = static_cast<std::uint64_t>(100 + t);
    learning::CvaeModel m = learning::make_cvae(2, 6, {0, 0}, {1, 1}, false, cfg);
    for (learning::Mlp* net : {&m.encoder, &m.decoder}) {
      const learning::Matrix x = random_matrix(rng, net->input_size(), 4);
      const learning::Matrix adj = random_matrix(rng, net->output_size(), 4);
      learning::MlpTape tape;
      net->forward(x, &tape);
      const auto g = net->backward(tape, adj);
      const auto f = [&] { return (net->forward(x).array() * adj.array()).sum(); };
      worst = std::max(worst, rel_error(flatten(g), numeric_grad(*net, f)));
    }
  }
  for (int t = 0; t < 10; ++t) {
    learning::CvaeConfig cfg;
    cfg.hidden = {10, 8};
    cfg.latent_dim = 2;
    cfg.seed = static_cast<std::uint64_t>(200 + t);
    learning::CvaeModel m = learning::make_cvae(3, 5, {0, 0, 0}, {1, 1, 1}, false, cfg);
    const learning::Matrix x = random_matrix(rng, 3, 6), c = random_matrix(rng, 5, 6), e = random_matrix(rng, 2, 6);
    const auto ev = learning::elbo_loss(m, x, c, e);
    const auto f = [&] { return learning::elbo_loss(m, x, c, e, false).loss; };
    worst = std::max(worst, rel_error(flatten(ev.encoder), numeric_grad(m.encoder, f)));
    worst = std::max(worst, rel_error(flatten(ev.decoder), numeric_grad(m.decoder, f)));
  }
  std::ostringstream d;
  d << "worst relative error " << worst << " (limit 1e-4)";
  return {worst <= 1e-4, d.str()};
}

Outcome kl_check() {
  const std::vector<double> zero{0.0}, one{1.0};
  const double a = learning::kl_standard_gaussian(zero, zero);
  const double b = learning::kl_standard_gaussian(one, zero);
  std::ostringstream d;
  d.precision(17);
  d << "KL(0,0) = " << a << ", KL(1,0) = " << b;
  return {a == 0.0 && std::abs(b - 0.5) <= 1e-12, d.str()};
}

Outcome mixture_law() {
  const int grid = 4;
  const int dim = learning::Conditioner::dimension(grid);
  learning::CvaeConfig cfg;
  cfg.hidden = {8};
  const auto cvae = learning::make_cvae(2, dim, {0, 0}, {1, 1}, false, cfg);
  const Workspace w = world({});
  const std::vector<LocalSpec> locals{{learning::Vector::Zero(dim), 0.25}, {learning::Vector::Ones(dim), 0.75}};
  MixtureSampler s = synthesize_samplers(cvae, locals, 0.3, UniformSampler(Robot(PointRobot{}), w));
  Rng rng(5);
  const int n = 10000;
  for (int i = 0; i < n; ++i) s.draw(rng);
  std::array<int, 3> counts{0, 0, 0};
  for (int p : s.provenance()) ++counts[static_cast<std::size_t>(p + 1)];
  const std::array<double, 3> expected{0.3, 0.175, 0.525};
  bool ok = true;
  std::ostringstream d;
  for (std::size_t k = 0; k < 3; ++k) {
    const double sd = std::sqrt(n * expected[k] * (1 - expected[k]));
    const double z = (counts[k] - n * expected[k]) / sd;
    ok = ok && std::abs(z) <= 3.0;
    d << (k ? ", " : "") << counts[k] << " (z " << z << ")";
  }
  return {ok, "counts uniform/local0/local1 " + d.str()};
}

Outcome rrt_star_sanity() {
  const Workspace w = world({});
  const Robot r(PointRobot{});
  UniformSampler u(r, w);
  int close = 0, trace_violations = 0;
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Configuration s, g;
    do {
      s = {uniform01(rng), uniform01(rng)};
      g = {uniform01(rng), uniform01(rng)};
    } while (r.distance(s, g) < 0.3);
    const PlanningProblem p{r, w, s, g, default_goal_radius(r, w)};
    auto params = PlannerParams::defaults_for(r, w);
    params.max_iters = 3000;
    params.seed = seed;
    const PlanResult res = plan_rrt_star(p, u, params);
    for (std::size_t i = 1; i < res.best_cost_trace.size(); ++i) {
      trace_violations += res.best_cost_trace[i] > res.best_cost_trace[i - 1];
    }
    if (res.status == PlanStatus::Success && validate_path(*res.path, r, w, params.resolution)) {
      const double straight = r.distance(s, g);
      close += std::abs(res.path->cost - straight) <= 0.05 * straight;
    }
  }
  return {close >= 90 && trace_violations == 0,
          std::to_string(close) + "/100 runs within 5% of the straight line, " + std::to_string(trace_violations) +
              " trace increases"};
}

struct OfflineArtifacts {
  fs::path models;
  fs::path dataset;
};

Outcome training_health(std::optional<OfflineArtifacts>& artifacts, const fs::path& dir) {
  OfflineConfig oc;
  oc.model_dir = dir / "models";
  const OfflineResult res = offline_learning(seeds(1000, 3000), oc);
  io::write_dataset(dir / "train.jsonl", res.records);
  artifacts = OfflineArtifacts{oc.model_dir, dir / "train.jsonl"};
  const double first = res.cvae_history.epoch_loss.front();
  const double last = res.cvae_history.epoch_loss.back();

  const auto truth = collect_mazes(seeds(900000, 20), oc.maze, oc.collect, oc.workers);
  int good = 0, noterm = 0;
  for (const auto& rec : truth.records) {
    const double eps = oc.collect.eps_merge(rec.workspace);
    try {
      const auto kp = learning::predict_keypoints(res.models.keypoint, rec.workspace, rec.keypoints.front(),
                                                  rec.keypoints.back(), OnlineConfig{}.delta_fraction * rec.workspace.bounds.diagonal());
      bool ok = true;
      for (std::size_t i = 1; i < kp.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Point2 g : rec.keypoints) best = std::min(best, distance(g, kp[i]));
        ok = ok && best <= 2.0 * eps;
      }
      good += ok;
    } catch (const Error&) {
      ++noterm;
    }
  }
  std::ostringstream d;
  d << "CVAE loss " << first << " -> " << last << " (ratio " << last / first << ", limit 0.5); keypoints within "
    << "2 eps_merge on " << good << "/20 held-out mazes (need 14; " << noterm << " did not terminate, "
    << truth.skipped_seeds.size() << " without ground truth); " << res.records.size() << " training records";
  return {last < 0.5 * first && good >= 14, d.str()};
}

Outcome directional(const std::optional<OfflineArtifacts>& artifacts) {
  if (!artifacts) return {false, "no trained models"};
  const LearnedModels models = load_models(artifacts->models);
  BenchmarkConfig bc;
  bc.env_seeds = seeds(900000, 20);
  bc.samplers = {"uniform", "mixture"};
  bc.budgets = {500};
  bc.runs = 20;
  bc.online.lambda = 0.5;
  const BenchmarkReport rep = run_benchmark(bc, &models);
  int ratio_ok = 0, envs = 0;
  for (const auto& r : rep.rows) {
    if (r.sampler != "mixture") continue;
    ++envs;
    ratio_ok += r.valid_ratio && *r.valid_ratio >= 1.3;
  }
  const SamplerSummary* uni = nullptr;
  const SamplerSummary* mix = nullptr;
  for (const auto& s : rep.summaries) (s.sampler == "uniform" ? uni : mix) = &s;
  if (!uni || !mix) return {false, "missing sampler summaries"};
  const bool a = ratio_ok * 10 >= envs * 7;
  const bool b = mix->success_rate > uni->success_rate;
  const bool c = mix->normalized_cost && *mix->normalized_cost < 1.0;
  std::ostringstream d;
  d << "(a) valid ratio >= 1.3 on " << ratio_ok << "/" << envs << " envs; (b) success " << mix->success_rate
    << " vs uniform " << uni->success_rate << "; (c) normalized cost "
    << (mix->normalized_cost ? std::to_string(*mix->normalized_cost) : std::string("n/a")) << "; normalized time "
    << (mix->normalized_time ? std::to_string(*mix->normalized_time) : std::string("n/a"));
  return {a && b && c, d.str()};
}

Outcome arm_collection() {
  int ok = 0, invalid = 0;
  std::string failed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ArmInstance inst = generate_arm_world(seed);
    const Robot r(inst.arm);
    const PlanningProblem p{r, inst.workspace, inst.start, inst.goal, default_goal_radius(r, inst.workspace)};
    try {
      const DatasetRecord rec = collect_training_example(p, {});
      const double res = PlannerParams::defaults_for(r, inst.workspace).resolution;
      bool valid = record_is_valid(rec, res);
      for (const auto& path : rec.paths) valid = valid && validate_path(path, r, inst.workspace, res);
      ok += valid;
      invalid += !valid;
    } catch (const Error& e) {
      failed += " " + std::to_string(seed) + ":" + std::string(to_string(e.kind()));
    }
  }
  return {ok >= 8 && invalid == 0, std::to_string(ok) + "/10 succeeded, " + std::to_string(invalid) +
                                       " invalid records; failures:" + (failed.empty() ? " none" : failed)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome bench_determinism(const std::optional<OfflineArtifacts>& artifacts, const fs::path& dir) {
  if (!artifacts) return {false, "no trained models"};
  nlohmann::json cfg = {{"heldout_first", 900000},
                        {"heldout_count", 5},
                        {"samplers", {"uniform", "mixture", "gmm"}},
                        {"budgets", {500}},
                        {"runs", 5},
                        {"models", artifacts->models.string()},
                        {"dataset", artifacts->dataset.string()}};
  io::write_text_file(dir / "bench.json", cfg.dump(2));
  std::string outs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / ("report" + std::to_string(i) + ".json");
    const std::string cmd = std::string("\"") + BSPPLAN_CLI + "\" bench --config \"" + (dir / "bench.json").string() +
                            "\" --out \"" + out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, "bench exited with status " + std::to_string(rc)};
    outs[i] = slurp(out);
  }
  const bool same = !outs[0].empty() && outs[0] == outs[1];
  return {same, std::to_string(outs[0].size()) + " byte reports " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "bspplan_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::optional<OfflineArtifacts> artifacts;

  report(1, "geometry/BSP property suite", 120, geometry_suite);
  report(2, "Dijkstra vs exhaustive search", 10, dijkstra_oracle);
  report(3, "gradient correctness", 60, gradient_check);
  report(4, "KL closed form", 1, kl_check);
  report(5, "mixture law", 10, mixture_law);
  report(6, "RRT* sanity", 300, rrt_star_sanity);
  report(7, "training health", 1800, [&] { return training_health(artifacts, dir); });
  report(8, "directional reproduction", 3600, [&] { return directional(artifacts); });
  report(9, "planar-arm collection", 600, arm_collection);
  report(10, "bench determinism", 600, [&] { return bench_determinism(artifacts, dir); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
