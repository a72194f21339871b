#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

namespace topomap {

/// Ground-truth place label per keyframe, consumed by the oracle backends.
class PlaceMap {
 public:
  void assign(const std::string& keyframe_id, int place) { places_[keyframe_id] = place; }
  std::size_t size() const { return places_.size(); }
  bool contains(std::string_view id) const { return places_.contains(std::string(id)); }

  /// Throws Error{kPipeline, "oracle.unknown_id"} naming the id.
  int place_of(std::string_view keyframe_id) const;

 private:
  std::unordered_map<std::string, int> places_;
};

}  // namespace topomap
