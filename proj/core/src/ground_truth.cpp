#include "topomap/ground_truth.hpp"

#include <numeric>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/session.hpp"

namespace topomap {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::pair<std::string, std::string> normalized(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

}  // namespace

GroundTruth::GroundTruth(std::vector<std::string> submap_order) : order_(std::move(submap_order)) {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (!position_.emplace(order_[i], i).second) {
      fail(ErrorCategory::kFormat, "gt.duplicate_submap", "submap '" + order_[i] + "' listed twice");
    }
  }
}

bool GroundTruth::contains(std::string_view submap_id) const {
  return position_.contains(std::string(submap_id));
}

void GroundTruth::add_covisible(const std::string& a, const std::string& b) {
  for (const auto* id : {&a, &b}) {
    if (!contains(*id)) fail(ErrorCategory::kFormat, "gt.unknown_id", "submap '" + *id + "' is not in the session");
  }
  if (a == b) fail(ErrorCategory::kFormat, "gt.self_pair", "self pair '" + a + "' (covisibility with itself is implied)");
  pairs_.insert(normalized(a, b));
}

bool GroundTruth::covisible(std::string_view a, std::string_view b) const {
  for (auto id : {a, b}) {
    if (!contains(id)) {
      fail(ErrorCategory::kPipeline, "gt.unknown_id", "ground truth has no submap '" + std::string(id) + "'");
    }
  }
  return a == b || pairs_.contains(normalized(a, b));
}

PlaceMap GroundTruth::place_map(const SessionManifest& session) const {
  // Union-find over submaps in chronological order.
  std::vector<std::size_t> parent(order_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : pairs_) {
    const std::size_t ra = find(position_.at(a));
    const std::size_t rb = find(position_.at(b));
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  // Places numbered by first appearance.
  std::unordered_map<std::size_t, int> label;
  PlaceMap places;
  for (const auto& s : session.submaps()) {
    auto it = position_.find(s.id);
    if (it == position_.end()) {
      fail(ErrorCategory::kFormat, "gt.unknown_id", "session submap '" + s.id + "' missing from ground truth");
    }
    const std::size_t root = find(it->second);
    auto [lit, inserted] = label.emplace(root, static_cast<int>(label.size()));
    for (const auto& kf : s.keyframes) places.assign(kf.id, lit->second);
  }
  return places;
}

std::string GroundTruth::to_text() const {
  std::string out = "# covisible submap pairs\n";
  for (const auto& [a, b] : pairs_) out += a + "," + b + "\n";
  return out;
}

GroundTruth GroundTruth::parse(const std::string& text, const std::string& source, const SessionManifest& session) {
  std::vector<std::string> order;
  for (const auto& s : session.submaps()) order.push_back(s.id);
  GroundTruth gt(std::move(order));

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto comma = body.find(',');
    const std::string where = source + ":" + std::to_string(lineno);
    if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos) {
      fail(ErrorCategory::kFormat, "gt.record", where + ": expected 'submap_a,submap_b', got '" + std::string(body) + "'");
    }
    const std::string a(trim(body.substr(0, comma)));
    const std::string b(trim(body.substr(comma + 1)));
    if (a.empty() || b.empty()) fail(ErrorCategory::kFormat, "gt.record", where + ": empty submap id");
    try {
      gt.add_covisible(a, b);
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), where + ": " + e.what());
    }
  }
  return gt;
}

GroundTruth GroundTruth::load(const std::filesystem::path& path, const SessionManifest& session) {
  return parse(json_util::read_text(path), path.string(), session);
}

}  // namespace topomap
