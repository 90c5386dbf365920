#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bspplan/bsp.hpp"
#include "bspplan/keypoint_graph.hpp"
#include "bspplan/learning/cvae.hpp"
#include "bspplan/learning/keypoint_net.hpp"
#include "bspplan/pipeline/collect.hpp"
#include "bspplan/planner.hpp"

namespace bspplan::io {

using nlohmann::json;

/// Parse errors of every loader below surface as Error(BadInput).
json workspace_to_json(const Workspace& w);
Workspace workspace_from_json(const json& j);

json robot_to_json(const Robot& r);
Robot robot_from_json(const json& j);

json configuration_to_json(const Configuration& q);
Configuration configuration_from_json(const json& j);

json path_to_json(const Path& p);
Path path_from_json(const json& j);

/// Nested {plane, inside, outside} / {cell, free}.
json tree_to_json(const BspTree& t);

json graph_to_json(const ConnectivityGraph& g);

json plan_result_to_json(const PlanResult& r);

json mlp_to_json(const learning::Mlp& m);
learning::Mlp mlp_from_json(const json& j);

json cvae_to_json(const learning::CvaeModel& m);
learning::CvaeModel cvae_from_json(const json& j);

json keypoint_net_to_json(const learning::KeypointNet& n);
learning::KeypointNet keypoint_net_from_json(const json& j);

json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const json& j);

/// One record per line.
void write_dataset(const std::filesystem::path& file, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& file);

/// Throw IoFailure when the file cannot be opened, BadInput on malformed JSON.
json read_json_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace bspplan::io
