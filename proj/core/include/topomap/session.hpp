#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/model.hpp"

namespace topomap {

inline constexpr const char* kSessionFormat = "topomap-session";
inline constexpr int kSessionFormatVersion = 1;

/// Ordered submaps of one exploration. Only keyframes that belong to a
/// submap are ever listed; in-between frames never reach the manifest.
///
/// The constructor validates every invariant (unique ids, strictly
/// increasing order, non-empty submaps, non-decreasing timestamps,
/// positive descriptor dimension) and throws Error{kFormat} with a field
/// path on the first violation.
class SessionManifest {
 public:
  SessionManifest(std::string session_id, std::size_t descriptor_dim, std::vector<Submap> submaps);

  const std::string& session_id() const { return session_id_; }
  std::size_t descriptor_dim() const { return descriptor_dim_; }
  const std::vector<Submap>& submaps() const { return submaps_; }
  std::size_t size() const { return submaps_.size(); }
  std::size_t num_keyframes() const { return keyframe_owner_.size(); }

  const Submap* find_submap(std::string_view id) const;
  const Submap& submap(std::string_view id) const;
  bool has_keyframe(std::string_view id) const;
  /// Id of the submap containing keyframe `id`.
  const std::string& submap_of_keyframe(std::string_view id) const;
  /// Every keyframe id in session order.
  std::vector<std::string> keyframe_ids() const;

 private:
  std::string session_id_;
  std::size_t descriptor_dim_;
  std::vector<Submap> submaps_;
  std::unordered_map<std::string, std::size_t> submap_index_;
  std::unordered_map<std::string, std::size_t> keyframe_owner_;
};

SessionManifest session_from_json(const nlohmann::json& doc);
nlohmann::json session_to_json(const SessionManifest& manifest);

SessionManifest load_session(const std::filesystem::path& path);
void write_session(const std::filesystem::path& path, const SessionManifest& manifest);

}  // namespace topomap
