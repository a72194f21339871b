#include "topomap/session.hpp"

#include <cmath>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"

namespace topomap {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& code, const std::string& message) {
  fail(ErrorCategory::kFormat, code, "session manifest: " + message);
}

std::string submap_path(std::size_t i) { return "submaps[" + std::to_string(i) + "]"; }

}  // namespace

SessionManifest::SessionManifest(std::string session_id, std::size_t descriptor_dim, std::vector<Submap> submaps)
    : session_id_(std::move(session_id)), descriptor_dim_(descriptor_dim), submaps_(std::move(submaps)) {
  if (descriptor_dim_ == 0) invalid("session.dim", "descriptor_dim must be positive");
  if (submaps_.empty()) invalid("session.empty", "a session needs at least one submap");

  for (std::size_t i = 0; i < submaps_.size(); ++i) {
    const Submap& s = submaps_[i];
    const std::string where = submap_path(i);
    if (s.id.empty()) invalid("session.format", where + ".id: empty id");
    if (!submap_index_.emplace(s.id, i).second) {
      invalid("session.duplicate_submap", where + ".id: duplicate submap id '" + s.id + "'");
    }
    if (i > 0 && s.order_index <= submaps_[i - 1].order_index) {
      invalid("session.order", where + ".order_index: " + std::to_string(s.order_index) +
                                   " is not greater than the previous " + std::to_string(submaps_[i - 1].order_index));
    }
    if (s.keyframes.empty()) invalid("session.empty_submap", where + ".keyframes: submap '" + s.id + "' has no keyframes");

    for (std::size_t k = 0; k < s.keyframes.size(); ++k) {
      const Keyframe& kf = s.keyframes[k];
      const std::string kwhere = where + ".keyframes[" + std::to_string(k) + "]";
      if (kf.id.empty()) invalid("session.format", kwhere + ".id: empty id");
      if (!std::isfinite(kf.timestamp)) invalid("session.timestamp", kwhere + ".timestamp: not finite");
      if (k > 0 && kf.timestamp < s.keyframes[k - 1].timestamp) {
        invalid("session.timestamp", kwhere + ".timestamp: decreases within submap '" + s.id + "'");
      }
      if (!keyframe_owner_.emplace(kf.id, i).second) {
        invalid("session.duplicate_keyframe", kwhere + ".id: duplicate keyframe id '" + kf.id + "'");
      }
    }
  }
}

const Submap* SessionManifest::find_submap(std::string_view id) const {
  auto it = submap_index_.find(std::string(id));
  return it == submap_index_.end() ? nullptr : &submaps_[it->second];
}

const Submap& SessionManifest::submap(std::string_view id) const {
  if (const Submap* s = find_submap(id)) return *s;
  fail(ErrorCategory::kPipeline, "session.unknown_submap", "unknown submap id '" + std::string(id) + "'");
}

bool SessionManifest::has_keyframe(std::string_view id) const {
  return keyframe_owner_.contains(std::string(id));
}

const std::string& SessionManifest::submap_of_keyframe(std::string_view id) const {
  auto it = keyframe_owner_.find(std::string(id));
  if (it == keyframe_owner_.end()) {
    fail(ErrorCategory::kPipeline, "session.unknown_keyframe", "unknown keyframe id '" + std::string(id) + "'");
  }
  return submaps_[it->second].id;
}

std::vector<std::string> SessionManifest::keyframe_ids() const {
  std::vector<std::string> ids;
  ids.reserve(keyframe_owner_.size());
  for (const auto& s : submaps_) {
    for (const auto& kf : s.keyframes) ids.push_back(kf.id);
  }
  return ids;
}

SessionManifest session_from_json(const json& doc) {
  using namespace json_util;
  constexpr const char* kCode = "session.format";
  if (get_string(doc, "format", "session", kCode) != kSessionFormat) invalid(kCode, "unexpected 'format' value");
  if (get_integer(doc, "version", "session", kCode) != kSessionFormatVersion) {
    invalid("session.version", "unsupported version");
  }
  const std::string session_id = get_string(doc, "session_id", "session", kCode);
  const std::int64_t dim = get_integer(doc, "descriptor_dim", "session", kCode);
  if (dim <= 0) invalid("session.dim", "descriptor_dim must be positive, got " + std::to_string(dim));

  std::vector<Submap> submaps;
  const json& jsubmaps = get_array(doc, "submaps", "session", kCode);
  for (std::size_t i = 0; i < jsubmaps.size(); ++i) {
    const std::string where = submap_path(i);
    Submap s;
    s.id = get_string(jsubmaps[i], "id", where, kCode);
    const std::int64_t order = get_integer(jsubmaps[i], "order_index", where, kCode);
    if (order < 0) invalid("session.order", where + ".order_index: negative");
    s.order_index = static_cast<std::size_t>(order);
    const json& jkfs = get_array(jsubmaps[i], "keyframes", where, kCode);
    for (std::size_t k = 0; k < jkfs.size(); ++k) {
      const std::string kwhere = where + ".keyframes[" + std::to_string(k) + "]";
      s.keyframes.push_back({get_string(jkfs[k], "id", kwhere, kCode), get_number(jkfs[k], "timestamp", kwhere, kCode)});
    }
    submaps.push_back(std::move(s));
  }
  return SessionManifest(session_id, static_cast<std::size_t>(dim), std::move(submaps));
}

json session_to_json(const SessionManifest& manifest) {
  json submaps = json::array();
  for (const auto& s : manifest.submaps()) {
    json kfs = json::array();
    for (const auto& kf : s.keyframes) kfs.push_back({{"id", kf.id}, {"timestamp", kf.timestamp}});
    submaps.push_back({{"id", s.id}, {"order_index", s.order_index}, {"keyframes", std::move(kfs)}});
  }
  json doc;
  doc["format"] = kSessionFormat;
  doc["version"] = kSessionFormatVersion;
  doc["session_id"] = manifest.session_id();
  doc["descriptor_dim"] = manifest.descriptor_dim();
  doc["submaps"] = std::move(submaps);
  return doc;
}

SessionManifest load_session(const std::filesystem::path& path) {
  const json doc = json_util::read(path, "session.parse");
  try {
    return session_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.category(), e.code(), path.string() + ": " + e.what());
  }
}

void write_session(const std::filesystem::path& path, const SessionManifest& manifest) {
  json_util::write_text(path, json_util::dump(session_to_json(manifest)));
}

}  // namespace topomap
