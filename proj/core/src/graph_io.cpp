#include "topomap/graph_io.hpp"

#include <sstream>

#include "topomap/json_util.hpp"

namespace topomap {

using nlohmann::json;

namespace {

constexpr const char* kCode = "graph.format";

NodeId to_node_id(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(ErrorCategory::kFormat, kCode, where + ": expected a non-negative node id");
  const auto raw = v.get<std::uint64_t>();
  if (raw > std::numeric_limits<std::uint32_t>::max()) fail(ErrorCategory::kFormat, kCode, where + ": node id out of range");
  return NodeId{static_cast<std::uint32_t>(raw)};
}

}  // namespace

json graph_to_json(const TopoGraph& graph, const json& provenance) {
  json nodes = json::array();
  for (const auto& n : graph.nodes()) {
    nodes.push_back({{"id", n.id.value}, {"submaps", n.submaps}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.a.value, e.b.value});

  json doc;
  doc["format"] = kGraphFormat;
  doc["version"] = kGraphFormatVersion;
  doc["num_nodes"] = graph.num_nodes();
  doc["num_edges"] = graph.num_edges();
  doc["position"] = graph.empty() ? json(nullptr) : json(graph.position().value);
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  if (!provenance.is_null()) doc["provenance"] = provenance;
  return doc;
}

TopoGraph graph_from_json(const json& doc) {
  using namespace json_util;
  if (get_string(doc, "format", "graph", kCode) != kGraphFormat) {
    fail(ErrorCategory::kFormat, kCode, "graph: unexpected 'format' value");
  }
  if (get_integer(doc, "version", "graph", kCode) != kGraphFormatVersion) {
    fail(ErrorCategory::kFormat, "graph.version", "graph: unsupported version");
  }

  std::vector<TopoNode> nodes;
  const json& jnodes = get_array(doc, "nodes", "graph", kCode);
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "graph.nodes[" + std::to_string(i) + "]";
    TopoNode n;
    n.id = to_node_id(member(jnodes[i], "id", where, kCode), where + ".id");
    for (const auto& s : get_array(jnodes[i], "submaps", where, kCode)) {
      if (!s.is_string()) fail(ErrorCategory::kFormat, kCode, where + ".submaps: expected strings");
      n.submaps.push_back(s.get<std::string>());
    }
    if (n.submaps.empty()) fail(ErrorCategory::kFormat, kCode, where + ": node without submaps");
    nodes.push_back(std::move(n));
  }

  std::vector<Edge> edges;
  const json& jedges = get_array(doc, "edges", "graph", kCode);
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string where = "graph.edges[" + std::to_string(i) + "]";
    if (!jedges[i].is_array() || jedges[i].size() != 2) fail(ErrorCategory::kFormat, kCode, where + ": expected [a, b]");
    edges.push_back(make_edge(to_node_id(jedges[i][0], where), to_node_id(jedges[i][1], where)));
  }

  NodeId position{};
  const json& jpos = member(doc, "position", "graph", kCode);
  if (!nodes.empty()) position = to_node_id(jpos, "graph.position");
  return TopoGraph::from_parts(std::move(nodes), edges, position);
}

void write_graph(const std::filesystem::path& path, const TopoGraph& graph, const json& provenance) {
  json_util::write_text(path, json_util::dump(graph_to_json(graph, provenance)));
}

TopoGraph read_graph(const std::filesystem::path& path) {
  return graph_from_json(json_util::read(path, "graph.parse"));
}

std::string to_dot(const TopoGraph& graph) {
  std::ostringstream out;
  out << "graph topomap {\n";
  out << "  node [shape=ellipse];\n";
  for (const auto& n : graph.nodes()) {
    out << "  n" << n.id.value << " [label=\"n" << n.id.value << " [" << n.submaps.size() << " submaps]\"";
    if (!graph.empty() && n.id == graph.position()) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& e : graph.edges()) {
    out << "  n" << e.a.value << " -- n" << e.b.value << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace topomap
