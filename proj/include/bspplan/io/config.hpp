#pragma once

#include <json.hpp>

#include "bspplan/pipeline/benchmark.hpp"
#include "bspplan/pipeline/offline.hpp"

namespace bspplan::io {

/// Each function overwrites the fields present in `j` and rejects unknown
/// keys with BadInput.
void apply(MazeConfig& c, const nlohmann::json& j);
void apply(CollectConfig& c, const nlohmann::json& j);
void apply(learning::CvaeConfig& c, const nlohmann::json& j);
void apply(learning::KeypointNetConfig& c, const nlohmann::json& j);
void apply(OnlineConfig& c, const nlohmann::json& j);
/// Keys: maze, collect, cvae, keypoint, cvae_envs, min_records, workers.
void apply(OfflineConfig& c, const nlohmann::json& j);
/// Keys: env_seeds, maze, samplers, budgets, runs, seed, online,
/// gmm_components, workers. Other keys listed in `extra` are ignored.
void apply(BenchmarkConfig& c, const nlohmann::json& j, std::initializer_list<const char*> extra = {});

}  // namespace bspplan::io
