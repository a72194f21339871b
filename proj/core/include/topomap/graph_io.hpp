#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "topomap/graph.hpp"

namespace topomap {

inline constexpr const char* kGraphFormat = "topomap-graph";
inline constexpr int kGraphFormatVersion = 1;

/// Structured graph document: nodes with their submap lists, the edge list
/// (ascending), the final position and an optional provenance echo.
nlohmann::json graph_to_json(const TopoGraph& graph, const nlohmann::json& provenance = nullptr);
TopoGraph graph_from_json(const nlohmann::json& doc);

void write_graph(const std::filesystem::path& path, const TopoGraph& graph, const nlohmann::json& provenance = nullptr);
TopoGraph read_graph(const std::filesystem::path& path);

/// Deterministic undirected DOT rendering, ids ascending.
std::string to_dot(const TopoGraph& graph);

}  // namespace topomap
