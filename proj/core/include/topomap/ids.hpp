#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace topomap {

/// Dense creation-order identifier of a topological node.
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
  friend std::ostream& operator<<(std::ostream& os, NodeId id) { return os << 'n' << id.value; }
};

}  // namespace topomap

template <>
struct std::hash<topomap::NodeId> {
  std::size_t operator()(topomap::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
