#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/graph.hpp"
#include "topomap/model.hpp"
#include "topomap/place_map.hpp"
#include "topomap/tables.hpp"

namespace topomap {

class SessionManifest;

/// Pairwise keypoint match counts from a geometric verifier. Counts are
/// symmetric: match_count(a, b) == match_count(b, a).
class MatchBackend {
 public:
  virtual ~MatchBackend() = default;
  virtual std::uint32_t match_count(std::string_view a, std::string_view b) const = 0;
  virtual std::string describe() const = 0;
};

class TableMatcher final : public MatchBackend {
 public:
  /// Missing pairs either fail or return `missing.default_value` (truncated
  /// to an integer count).
  TableMatcher(CountTable table, MissingEntryPolicy missing);

  std::uint32_t match_count(std::string_view a, std::string_view b) const override;
  std::string describe() const override;

 private:
  CountTable table_;
  MissingEntryPolicy missing_;
};

/// Integer count distribution used by the oracle matcher.
struct CountDistribution {
  enum class Kind { kConstant, kUniform };
  Kind kind = Kind::kConstant;
  std::uint32_t low = 0;
  std::uint32_t high = 0;

  static CountDistribution constant(std::uint32_t value) { return {Kind::kConstant, value, value}; }
  static CountDistribution uniform(std::uint32_t low, std::uint32_t high) { return {Kind::kUniform, low, high}; }

  nlohmann::json to_json() const;
  static CountDistribution from_json(const nlohmann::json& doc, const std::string& where);
};

class OracleMatcher final : public MatchBackend {
 public:
  OracleMatcher(std::shared_ptr<const PlaceMap> places, CountDistribution same_place,
                CountDistribution different_place, std::uint64_t seed);

  std::uint32_t match_count(std::string_view a, std::string_view b) const override;
  std::string describe() const override;

 private:
  std::shared_ptr<const PlaceMap> places_;
  CountDistribution same_;
  CountDistribution different_;
  std::uint64_t seed_;
};

/// Indices of the first, middle (floor((n-1)/2)) and last keyframe,
/// deduplicated in order.
std::vector<std::size_t> triplet_indices(std::size_t n);
std::vector<std::string> sample_triplet(const Submap& submap);

struct GeometricResult {
  std::optional<NodeId> node;               // first node with a count > threshold
  std::optional<std::uint32_t> best_count;  // largest count observed, if any comparison ran
  std::size_t comparisons = 0;              // backend calls
};

/// Compares the query's triplet against the triplet of every submap of each
/// window node, nodes taken in the given order and submaps in insertion
/// order. Stops at the first count strictly above `threshold`.
GeometricResult geometric_localization(const Submap& query, std::span<const NodeId> ordered_window,
                                       const TopoGraph& graph, const SessionManifest& session,
                                       const MatchBackend& backend, std::uint32_t threshold);

}  // namespace topomap
