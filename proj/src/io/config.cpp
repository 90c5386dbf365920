#include "bspplan/io/config.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace bspplan::io {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, const char* section) : j_(j), section_(section) {
    if (!j.is_object()) throw Error(ErrorKind::BadInput, std::string(section) + " config must be an object");
  }

  template <class T>
  Reader& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::BadInput, std::string(section_) + "." + key + ": " + e.what());
    }
    return *this;
  }

  template <class T>
  Reader& nested(const char* key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) apply(out, j_.at(key));
    return *this;
  }

  Reader& allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) seen_.insert(k);
    return *this;
  }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw Error(ErrorKind::BadInput, "unknown key '" + k + "' in " + section_ + " config");
    }
  }

 private:
  const json& j_;
  const char* section_;
  std::set<std::string> seen_;
};

}  // namespace

void apply(MazeConfig& c, const json& j) {
  Reader(j, "maze")
      .get("min_walls", c.min_walls)
      .get("max_walls", c.max_walls)
      .get("min_gap", c.min_gap)
      .get("max_gap", c.max_gap)
      .get("min_fill", c.min_fill)
      .get("max_fill", c.max_fill)
      .get("max_retries", c.max_retries)
      .done();
  c.validate();
}

void apply(CollectConfig& c, const json& j) {
  Reader(j, "collect")
      .get("resolution", c.resolution)
      .get("merge_fraction", c.merge_fraction)
      .get("rrt_iters", c.rrt_iters)
      .get("rrt_goal_bias", c.rrt_goal_bias)
      .get("attempts", c.attempts)
      .get("max_repairs", c.max_repairs)
      .get("max_subproblem_solves", c.max_subproblem_solves)
      .get("seed", c.seed)
      .done();
  c.validate();
}

void apply(learning::CvaeConfig& c, const json& j) {
  Reader(j, "cvae")
      .get("hidden", c.hidden)
      .get("latent_dim", c.latent_dim)
      .get("epochs", c.epochs)
      .get("batch_size", c.batch_size)
      .get("learning_rate", c.learning_rate)
      .get("data_scale", c.data_scale)
      .get("seed", c.seed)
      .done();
}

void apply(learning::KeypointNetConfig& c, const json& j) {
  Reader(j, "keypoint")
      .get("hidden", c.hidden)
      .get("grid", c.grid)
      .get("epochs", c.epochs)
      .get("batch_size", c.batch_size)
      .get("learning_rate", c.learning_rate)
      .get("seed", c.seed)
      .get("mirror", c.mirror)
      .done();
}

void apply(OnlineConfig& c, const json& j) {
  Reader(j, "online").get("lambda", c.lambda).get("delta_fraction", c.delta_fraction).get("max_steps", c.max_steps).done();
}

void apply(OfflineConfig& c, const json& j) {
  Reader(j, "offline")
      .nested("maze", c.maze)
      .nested("collect", c.collect)
      .nested("cvae", c.cvae)
      .nested("keypoint", c.keypoint)
      .get("cvae_envs", c.cvae_envs)
      .get("jitter_copies", c.jitter.copies)
      .get("jitter_sigma", c.jitter.sigma)
      .get("jitter_stride", c.jitter.stride)
      .get("min_records", c.min_records)
      .get("workers", c.workers)
      .done();
}

void apply(BenchmarkConfig& c, const json& j, std::initializer_list<const char*> extra) {
  Reader(j, "bench")
      .get("env_seeds", c.env_seeds)
      .nested("maze", c.maze)
      .get("samplers", c.samplers)
      .get("budgets", c.budgets)
      .get("runs", c.runs)
      .get("seed", c.seed)
      .nested("online", c.online)
      .get("gmm_components", c.gmm_components)
      .get("workers", c.workers)
      .allow(extra)
      .done();
}

}  // namespace bspplan::io
