#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topomap/place_map.hpp"

namespace topomap {

class SessionManifest;

/// Symmetric submap covisibility labels. Self-pairs are implied, never
/// stored. File format: one `id_a,id_b` pair per line, '#' starts a comment.
class GroundTruth {
 public:
  GroundTruth() = default;
  /// Submap ids in chronological (session) order.
  explicit GroundTruth(std::vector<std::string> submap_order);

  const std::vector<std::string>& order() const { return order_; }
  bool contains(std::string_view submap_id) const;
  std::size_t num_pairs() const { return pairs_.size(); }

  /// Throws Error{kFormat} on unknown ids ("gt.unknown_id") or a self pair
  /// ("gt.self_pair"). Re-adding a pair in either order is a no-op.
  void add_covisible(const std::string& a, const std::string& b);

  /// a ~ b; reflexive. Throws Error{kPipeline, "gt.unknown_id"} for ids
  /// outside the session.
  bool covisible(std::string_view a, std::string_view b) const;

  /// Normalized (a < b) pairs, sorted.
  const std::set<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

  /// Keyframe -> place label where places are the connected components of
  /// the covisibility relation (each submap's keyframes share its place).
  PlaceMap place_map(const SessionManifest& session) const;

  std::string to_text() const;
  static GroundTruth parse(const std::string& text, const std::string& source, const SessionManifest& session);
  static GroundTruth load(const std::filesystem::path& path, const SessionManifest& session);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> position_;
  std::set<std::pair<std::string, std::string>> pairs_;
};

}  // namespace topomap
