#pragma once

#include <filesystem>

#include <json.hpp>

#include "latticewave/graph.hpp"

namespace latticewave {

nlohmann::json graph_to_json(const MetricGraph& graph);
MetricGraph graph_from_json(const nlohmann::json& j);

void save_graph(const std::filesystem::path& path, const MetricGraph& graph);
MetricGraph load_graph(const std::filesystem::path& path);

}  // namespace latticewave
