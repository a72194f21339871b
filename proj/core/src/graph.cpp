#include "topomap/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

#include "topomap/error.hpp"

namespace topomap {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

}  // namespace

Edge make_edge(NodeId u, NodeId v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

const TopoNode& TopoGraph::node(NodeId id) const {
  require_node(id, "node");
  return nodes_[id.index()];
}

const std::vector<NodeId>& TopoGraph::neighbors(NodeId id) const {
  require_node(id, "neighbors");
  return adjacency_[id.index()];
}

NodeId TopoGraph::position() const {
  if (!position_) {
    fail(ErrorCategory::kPipeline, "graph.empty", "topological graph has no nodes yet");
  }
  return *position_;
}

bool TopoGraph::has_edge(NodeId u, NodeId v) const {
  return edges_.contains(make_edge(u, v));
}

std::optional<NodeId> TopoGraph::owner_of(std::string_view submap_id) const {
  auto it = owner_.find(std::string(submap_id));
  if (it == owner_.end()) return std::nullopt;
  return it->second;
}

NodeId TopoGraph::create_node(const std::string& submap_id, NodeId prev) {
  require_unassigned(submap_id);
  if (!nodes_.empty()) require_node(prev, "create_node prev");

  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back(TopoNode{id, {submap_id}});
  adjacency_.emplace_back();
  owner_.emplace(submap_id, id);
  if (id.value > 0) add_edge(prev, id);
  position_ = id;
  return id;
}

void TopoGraph::merge_into_node(const std::string& submap_id, NodeId target, NodeId prev) {
  require_node(target, "merge target");
  require_node(prev, "merge prev");
  require_unassigned(submap_id);

  nodes_[target.index()].submaps.push_back(submap_id);
  owner_.emplace(submap_id, target);
  if (target != prev) add_edge(prev, target);
  position_ = target;
}

std::vector<WindowEntry> TopoGraph::window_entries(NodeId center, std::size_t max_hops) const {
  require_node(center, "window center");

  std::vector<std::size_t> dist(nodes_.size(), kUnreached);
  std::deque<NodeId> frontier{center};
  dist[center.index()] = 0;
  std::vector<WindowEntry> out;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const std::size_t d = dist[u.index()];
    out.push_back({u, d});
    if (d == max_hops) continue;
    for (NodeId v : adjacency_[u.index()]) {
      if (dist[v.index()] != kUnreached) continue;
      dist[v.index()] = d + 1;
      frontier.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), [](const WindowEntry& a, const WindowEntry& b) {
    return a.hops != b.hops ? a.hops < b.hops : a.node < b.node;
  });
  return out;
}

std::vector<WindowEntry> TopoGraph::all_entries(NodeId center) const {
  return window_entries(center, kUnreached);
}

std::vector<NodeId> TopoGraph::node_window(NodeId center, std::size_t m) const {
  std::vector<NodeId> ids;
  for (const auto& entry : window_entries(center, m)) ids.push_back(entry.node);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void TopoGraph::check_invariants() const {
  auto violated = [](const std::string& what) {
    fail(ErrorCategory::kFormat, "graph.invariant", "graph invariant violated: " + what);
  };

  std::unordered_map<std::string, NodeId> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TopoNode& n = nodes_[i];
    if (n.id.index() != i) violated("node ids are not dense creation-order integers");
    if (n.submaps.empty()) violated("node " + std::to_string(i) + " has no submaps");
    for (const auto& s : n.submaps) {
      if (!seen.emplace(s, n.id).second) violated("submap '" + s + "' appears in more than one node");
    }
  }
  if (seen != owner_) violated("submap ownership index out of sync");

  for (const Edge& e : edges_) {
    if (!contains(e.a) || !contains(e.b)) violated("edge references a missing node");
    if (e.a == e.b) violated("self-loop edge");
  }

  if (nodes_.empty()) {
    if (position_) violated("position set on an empty graph");
    return;
  }
  if (!position_ || !contains(*position_)) violated("current position is not a valid node");
  if (all_entries(NodeId{0}).size() != nodes_.size()) violated("graph is not connected");
}

TopoGraph TopoGraph::from_parts(std::vector<TopoNode> nodes, const std::vector<Edge>& edges, NodeId position) {
  TopoGraph g;
  g.adjacency_.resize(nodes.size());
  for (const auto& n : nodes) {
    for (const auto& s : n.submaps) {
      if (!g.owner_.emplace(s, n.id).second) {
        fail(ErrorCategory::kFormat, "graph.duplicate_submap", "submap '" + s + "' appears in more than one node");
      }
    }
  }
  g.nodes_ = std::move(nodes);
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    if (g.nodes_[i].id.index() != i) {
      fail(ErrorCategory::kFormat, "graph.node_ids", "node ids must be 0..N-1 in order");
    }
  }
  for (const Edge& e : edges) {
    if (!g.contains(e.a) || !g.contains(e.b) || e.a == e.b) {
      std::ostringstream msg;
      msg << "invalid edge {" << e.a.value << "," << e.b.value << "}";
      fail(ErrorCategory::kFormat, "graph.edge", msg.str());
    }
    g.add_edge(e.a, e.b);
  }
  if (!g.nodes_.empty()) g.position_ = position;
  g.check_invariants();
  return g;
}

bool operator==(const TopoGraph& lhs, const TopoGraph& rhs) {
  return lhs.nodes_ == rhs.nodes_ && lhs.edges_ == rhs.edges_ && lhs.position_ == rhs.position_;
}

void TopoGraph::require_node(NodeId id, const char* what) const {
  if (!contains(id)) {
    fail(ErrorCategory::kPipeline, "graph.unknown_node",
         std::string(what) + ": node " + std::to_string(id.value) + " does not exist");
  }
}

void TopoGraph::require_unassigned(const std::string& submap_id) const {
  if (auto it = owner_.find(submap_id); it != owner_.end()) {
    fail(ErrorCategory::kPipeline, "graph.duplicate_submap",
         "submap '" + submap_id + "' already belongs to node " + std::to_string(it->second.value));
  }
}

void TopoGraph::add_edge(NodeId u, NodeId v) {
  if (!edges_.insert(make_edge(u, v)).second) return;
  auto link = [this](NodeId from, NodeId to) {
    auto& list = adjacency_[from.index()];
    list.insert(std::upper_bound(list.begin(), list.end(), to), to);
  };
  link(u, v);
  link(v, u);
}

}  // namespace topomap
