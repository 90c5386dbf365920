#include "bspplan/pipeline/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "bspplan/learning/encoding.hpp"
#include "bspplan/parallel.hpp"
#include "bspplan/pipeline/gmm.hpp"
#include "bspplan/pipeline/offline.hpp"

namespace bspplan {

using nlohmann::json;

namespace {

class LambdaMix final : public SampleSource {
 public:
  LambdaMix(GmmSampler inner, UniformSampler uniform, double lambda)
      : inner_(std::move(inner)), uniform_(std::move(uniform)), lambda_(lambda) {}
  Configuration draw(Rng& rng) override {
    if (uniform01(rng) < lambda_) return uniform_.draw(rng);
    return inner_.draw(rng);
  }

 private:
  GmmSampler inner_;
  UniformSampler uniform_;
  double lambda_;
};

struct RunOutcome {
  bool success = false;
  double cost = 0.0;
  double time = 0.0;
  int drawn = 0;
  int valid = 0;
  double wall = 0.0;
};

struct EnvSetup {
  MazeInstance maze;
  PlanningProblem problem;
  std::optional<OnlinePlan> learned;
  std::optional<OnlinePlan> learned_only;
  std::optional<GmmSampler> gmm;
  bool fallback = false;
};

json num(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

OnlinePlan online_or_fallback(const LearnedModels& models, const PlanningProblem& p, OnlineConfig oc, bool& fallback) {
  try {
    return online_execute(models, p, oc);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoTermination) throw;
  }
  fallback = true;
  const learning::Conditioner conditioner(p.workspace, models.keypoint.grid);
  const Point2 s = p.robot.workspace_point(p.start);
  const Point2 g = p.robot.workspace_point(p.target);
  std::vector<LocalSpec> locals{{conditioner.condition(s, g), 1.0}};
  return {{s, g}, synthesize_samplers(models.cvae, locals, oc.lambda, UniformSampler(p.robot, p.workspace))};
}

/// Training record whose occupancy grid and endpoints are closest to the problem's.
const DatasetRecord& most_similar(const std::vector<DatasetRecord>& records, const PlanningProblem& p) {
  constexpr int kGrid = 16;
  const Point2 s = p.robot.workspace_point(p.start);
  const Point2 g = p.robot.workspace_point(p.target);
  const auto target = learning::encode_environment(p.workspace, s, g, kGrid).occupancy;
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto occ = learning::encode_environment(r.workspace, r.keypoints.front(), r.keypoints.back(), kGrid).occupancy;
    double score = 0.0;
    for (std::size_t k = 0; k < occ.size(); ++k) score += std::abs(occ[k] - target[k]);
    score += distance(r.keypoints.front(), s) + distance(r.keypoints.back(), g);
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return records[best];
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (env_seeds.empty()) throw Error(ErrorKind::InvalidParams, "benchmark needs environments");
  if (samplers.empty() || budgets.empty() || runs <= 0) throw Error(ErrorKind::InvalidParams, "benchmark needs samplers, budgets and runs");
  for (const auto& s : samplers) {
    if (s != "uniform" && s != "cvae" && s != "mixture" && s != "gmm") {
      throw Error(ErrorKind::InvalidParams, "unknown sampler '" + s + "'");
    }
  }
  for (int b : budgets) {
    if (b <= 0) throw Error(ErrorKind::InvalidParams, "budgets must be positive");
  }
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double ci95(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

double median_of_means(const std::vector<double>& xs, std::size_t group) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  group = std::max<std::size_t>(1, group);
  std::vector<double> means;
  for (std::size_t i = 0; i < xs.size(); i += group) {
    const std::size_t end = std::min(xs.size(), i + group);
    means.push_back(mean(std::vector<double>(xs.begin() + static_cast<std::ptrdiff_t>(i), xs.begin() + static_cast<std::ptrdiff_t>(end))));
  }
  std::sort(means.begin(), means.end());
  const std::size_t n = means.size();
  return n % 2 == 1 ? means[n / 2] : 0.5 * (means[n / 2 - 1] + means[n / 2]);
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config, const LearnedModels* models,
                              const std::vector<DatasetRecord>* training_records) {
  config.validate();
  const auto wants = [&](const char* s) { return std::find(config.samplers.begin(), config.samplers.end(), s) != config.samplers.end(); };
  if ((wants("cvae") || wants("mixture")) && !models) throw Error(ErrorKind::MissingModel, "learned samplers need trained models");
  if (wants("gmm") && (!training_records || training_records->empty())) {
    throw Error(ErrorKind::MissingModel, "the gmm sampler needs training records");
  }

  const std::size_t n_env = config.env_seeds.size();
  std::vector<EnvSetup> envs;
  for (std::size_t e = 0; e < n_env; ++e) {
    EnvSetup s;
    s.maze = generate_maze(config.env_seeds[e], config.maze);
    s.problem = maze_problem(s.maze);
    if (wants("mixture")) s.learned = online_or_fallback(*models, s.problem, config.online, s.fallback);
    if (wants("cvae")) {
      OnlineConfig oc = config.online;
      oc.lambda = 0.0;
      s.learned_only = online_or_fallback(*models, s.problem, oc, s.fallback);
    }
    if (wants("gmm")) {
      std::vector<Configuration> data;
      for (const auto& p : most_similar(*training_records, s.problem).paths) {
        data.insert(data.end(), p.configurations.begin(), p.configurations.end());
      }
      s.gmm = fit_gmm_baseline(data, config.gmm_components, derive_seed(config.seed, config.env_seeds[e]),
                               s.problem.robot.is_arm());
    }
    envs.push_back(std::move(s));
  }

  const std::size_t n_s = config.samplers.size();
  const std::size_t n_b = config.budgets.size();
  const auto n_r = static_cast<std::size_t>(config.runs);
  const std::size_t total = n_env * n_s * n_b * n_r;
  const auto outcomes = parallel_map<RunOutcome>(
      total,
      [&](std::size_t idx) {
        const std::size_t r = idx % n_r;
        const std::size_t b = (idx / n_r) % n_b;
        const std::size_t s = (idx / (n_r * n_b)) % n_s;
        const std::size_t e = idx / (n_r * n_b * n_s);
        const EnvSetup& env = envs[e];
        const std::string& name = config.samplers[s];
        std::unique_ptr<SampleSource> source;
        const UniformSampler uniform(env.problem.robot, env.problem.workspace);
        if (name == "uniform") {
          source = std::make_unique<UniformSampler>(uniform);
        } else if (name == "mixture") {
          source = std::make_unique<MixtureSampler>(env.learned->sampler);
        } else if (name == "cvae") {
          source = std::make_unique<MixtureSampler>(env.learned_only->sampler);
        } else {
          source = std::make_unique<LambdaMix>(*env.gmm, uniform, config.online.lambda);
        }
        PlannerParams params = PlannerParams::defaults_for(env.problem.robot, env.problem.workspace);
        params.max_iters = config.budgets[b];
        // Common random numbers: every sampler sees the same seed per (env, run).
        params.seed = derive_seed(derive_seed(config.seed, config.env_seeds[e]), r);
        const auto t0 = std::chrono::steady_clock::now();
        const PlanResult res = plan_rrt_star(env.problem, *source, params);
        RunOutcome o;
        o.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.success = res.status == PlanStatus::Success;
        if (o.success) {
          if (!validate_path(*res.path, env.problem.robot, env.problem.workspace, params.resolution)) {
            throw Error(ErrorKind::Infeasible, "planner returned a path that fails re-validation");
          }
          o.cost = res.path->cost;
        }
        o.time = static_cast<double>(res.checks_to_first_solution);
        o.drawn = res.samples_drawn;
        o.valid = res.valid_samples;
        return o;
      },
      config.workers);

  BenchmarkReport report;
  for (std::size_t e = 0; e < n_env; ++e) {
    for (std::size_t s = 0; s < n_s; ++s) {
      for (std::size_t b = 0; b < n_b; ++b) {
        BenchmarkRow row;
        row.env_seed = config.env_seeds[e];
        row.sampler = config.samplers[s];
        row.budget = config.budgets[b];
        row.runs = config.runs;
        row.keypoint_fallback = row.sampler != "uniform" && row.sampler != "gmm" && envs[e].fallback;
        std::vector<double> costs, times;
        long long drawn = 0, valid = 0;
        for (std::size_t r = 0; r < n_r; ++r) {
          const RunOutcome& o = outcomes[((e * n_s + s) * n_b + b) * n_r + r];
          if (o.success) {
            ++row.successes;
            costs.push_back(o.cost);
          }
          times.push_back(o.time);
          drawn += o.drawn;
          valid += o.valid;
          row.wall_seconds += o.wall;
        }
        row.success_rate = static_cast<double>(row.successes) / static_cast<double>(row.runs);
        if (!costs.empty()) row.mean_cost = mean(costs);
        row.ci_cost = ci95(costs);
        row.mean_time = mean(times);
        row.ci_time = ci95(times);
        row.median_of_means_time = median_of_means(times);
        row.valid_fraction = drawn > 0 ? static_cast<double>(valid) / static_cast<double>(drawn) : 0.0;
        report.rows.push_back(std::move(row));
      }
    }
  }

  // Normalization against uniform at the same environment and budget; when
  // uniform never succeeded there, costs use the first sampler that did.
  auto row_at = [&](std::size_t e, std::size_t s, std::size_t b) -> BenchmarkRow& {
    return report.rows[(e * n_s + s) * n_b + b];
  };
  const auto uniform_it = std::find(config.samplers.begin(), config.samplers.end(), "uniform");
  for (std::size_t e = 0; e < n_env; ++e) {
    for (std::size_t b = 0; b < n_b; ++b) {
      std::optional<std::size_t> base;
      if (uniform_it != config.samplers.end()) base = static_cast<std::size_t>(uniform_it - config.samplers.begin());
      std::optional<std::size_t> cost_base = base;
      if (!cost_base || !row_at(e, *cost_base, b).mean_cost) {
        cost_base.reset();
        for (std::size_t s = 0; s < n_s && !cost_base; ++s) {
          if (row_at(e, s, b).mean_cost) cost_base = s;
        }
      }
      for (std::size_t s = 0; s < n_s; ++s) {
        BenchmarkRow& row = row_at(e, s, b);
        if (base) {
          const BenchmarkRow& br = row_at(e, *base, b);
          if (br.median_of_means_time > 0.0) row.normalized_time = row.median_of_means_time / br.median_of_means_time;
          if (br.valid_fraction > 0.0) row.valid_ratio = row.valid_fraction / br.valid_fraction;
        }
        if (cost_base) {
          const BenchmarkRow& br = row_at(e, *cost_base, b);
          row.normalization_base = config.samplers[*cost_base];
          if (row.mean_cost) row.normalized_cost = *row.mean_cost / *br.mean_cost;
        }
      }
    }
  }

  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t b = 0; b < n_b; ++b) {
      SamplerSummary sum;
      sum.sampler = config.samplers[s];
      sum.budget = config.budgets[b];
      std::vector<double> nt, nc, vf;
      int succ = 0, runs = 0;
      for (std::size_t e = 0; e < n_env; ++e) {
        const BenchmarkRow& row = row_at(e, s, b);
        succ += row.successes;
        runs += row.runs;
        vf.push_back(row.valid_fraction);
        if (row.normalized_time) nt.push_back(*row.normalized_time);
        if (row.normalized_cost) nc.push_back(*row.normalized_cost);
      }
      sum.success_rate = runs > 0 ? static_cast<double>(succ) / runs : 0.0;
      sum.mean_valid_fraction = mean(vf);
      if (!nt.empty()) sum.normalized_time = mean(nt);
      sum.ci_normalized_time = ci95(nt);
      if (!nc.empty()) sum.normalized_cost = mean(nc);
      sum.ci_normalized_cost = ci95(nc);
      sum.cost_environments = static_cast<int>(nc.size());
      report.summaries.push_back(std::move(sum));
    }
  }
  return report;
}

json BenchmarkReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"env_seed", r.env_seed},
                      {"sampler", r.sampler},
                      {"budget", r.budget},
                      {"runs", r.runs},
                      {"successes", r.successes},
                      {"success_rate", r.success_rate},
                      {"mean_cost", num(r.mean_cost)},
                      {"ci_cost", r.ci_cost},
                      {"mean_time", r.mean_time},
                      {"ci_time", r.ci_time},
                      {"median_of_means_time", r.median_of_means_time},
                      {"valid_fraction", r.valid_fraction},
                      {"normalization_base", r.normalization_base},
                      {"normalized_time", num(r.normalized_time)},
                      {"normalized_cost", num(r.normalized_cost)},
                      {"valid_ratio", num(r.valid_ratio)},
                      {"keypoint_fallback", r.keypoint_fallback}});
  }
  json sums = json::array();
  for (const auto& s : summaries) {
    sums.push_back({{"sampler", s.sampler},
                    {"budget", s.budget},
                    {"success_rate", s.success_rate},
                    {"mean_valid_fraction", s.mean_valid_fraction},
                    {"normalized_time", num(s.normalized_time)},
                    {"ci_normalized_time", s.ci_normalized_time},
                    {"normalized_cost", num(s.normalized_cost)},
                    {"ci_normalized_cost", s.ci_normalized_cost},
                    {"cost_environments", s.cost_environments}});
  }
  return {{"time_unit", "collision_checks_to_first_solution"}, {"rows", rows_j}, {"summary", sums}};
}

json BenchmarkReport::timing_json() const {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"env_seed", r.env_seed}, {"sampler", r.sampler}, {"budget", r.budget}, {"wall_seconds", r.wall_seconds}});
  }
  return out;
}

}  // namespace bspplan
