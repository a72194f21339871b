#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topomap/ids.hpp"

namespace topomap {

/// A place: every submap observing the same colon region.
struct TopoNode {
  NodeId id;
  std::vector<std::string> submaps;  // insertion order, no duplicates

  friend bool operator==(const TopoNode&, const TopoNode&) = default;
};

/// Undirected traversability edge, stored with `a < b`.
struct Edge {
  NodeId a;
  NodeId b;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

Edge make_edge(NodeId u, NodeId v);

/// Node together with its hop distance from a query center.
struct WindowEntry {
  NodeId node;
  std::size_t hops = 0;

  friend constexpr auto operator<=>(const WindowEntry&, const WindowEntry&) = default;
};

/// Topological map: nodes, undirected traversability edges and the current
/// position. Mutation goes through create_node / merge_into_node only, which
/// keep the graph connected and the submap sets disjoint.
class TopoGraph {
 public:
  TopoGraph() = default;

  bool empty() const { return nodes_.empty(); }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_submaps() const { return owner_.size(); }

  const std::vector<TopoNode>& nodes() const { return nodes_; }
  const TopoNode& node(NodeId id) const;
  const std::set<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& neighbors(NodeId id) const;

  /// Current position S_t. Throws on an empty graph.
  NodeId position() const;

  bool contains(NodeId id) const { return id.index() < nodes_.size(); }
  bool has_edge(NodeId u, NodeId v) const;
  std::optional<NodeId> owner_of(std::string_view submap_id) const;

  /// Appends a node holding only `submap_id`. On a non-empty graph the node is
  /// linked to `prev`; on an empty graph `prev` is ignored. Moves the position
  /// to the new node.
  NodeId create_node(const std::string& submap_id, NodeId prev);

  /// Adds `submap_id` to `target`, links `prev`-`target` when they differ and
  /// moves the position to `target`.
  void merge_into_node(const std::string& submap_id, NodeId target, NodeId prev);

  /// Hop distance (BFS over traversability edges) from `center` to every node
  /// within `max_hops`, sorted by (hops, id). Includes `center` at distance 0.
  std::vector<WindowEntry> window_entries(NodeId center, std::size_t max_hops) const;

  /// Hop distance to every node, sorted by (hops, id).
  std::vector<WindowEntry> all_entries(NodeId center) const;

  /// Node ids within `m` hops of `center`, ascending by id.
  std::vector<NodeId> node_window(NodeId center, std::size_t m) const;

  /// Verifies partition, edge validity and connectivity. Throws Error on
  /// violation; used by tests and after deserialization.
  void check_invariants() const;

  /// Rebuilds a graph from serialized parts and validates it.
  static TopoGraph from_parts(std::vector<TopoNode> nodes, const std::vector<Edge>& edges, NodeId position);

  friend bool operator==(const TopoGraph& lhs, const TopoGraph& rhs);

 private:
  void require_node(NodeId id, const char* what) const;
  void require_unassigned(const std::string& submap_id) const;
  void add_edge(NodeId u, NodeId v);

  std::vector<TopoNode> nodes_;
  std::set<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;  // each list kept sorted
  std::unordered_map<std::string, NodeId> owner_;
  std::optional<NodeId> position_;
};

}  // namespace topomap
