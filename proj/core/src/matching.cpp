#include "topomap/matching.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/pair_random.hpp"
#include "topomap/session.hpp"

namespace topomap {

using nlohmann::json;

TableMatcher::TableMatcher(CountTable table, MissingEntryPolicy missing) : table_(std::move(table)), missing_(missing) {
  if (missing_.kind == MissingEntryPolicy::Kind::kDefault && !(missing_.default_value >= 0.0)) {
    fail(ErrorCategory::kConfig, "config.missing_default", "default match count must be non-negative");
  }
}

std::uint32_t TableMatcher::match_count(std::string_view a, std::string_view b) const {
  if (auto count = table_.find(a, b)) return *count;
  if (missing_.kind == MissingEntryPolicy::Kind::kDefault) return static_cast<std::uint32_t>(missing_.default_value);
  fail(ErrorCategory::kPipeline, "counts.missing",
       "match table has no entry for (" + std::string(a) + "," + std::string(b) + ")");
}

std::string TableMatcher::describe() const { return "table(" + std::to_string(table_.size()) + " counts)"; }

json CountDistribution::to_json() const {
  if (kind == Kind::kConstant) return {{"kind", "constant"}, {"value", low}};
  return {{"kind", "uniform"}, {"low", low}, {"high", high}};
}

CountDistribution CountDistribution::from_json(const json& doc, const std::string& where) {
  using namespace json_util;
  constexpr const char* kCode = "config.distribution";
  auto count = [&](const char* key) {
    const std::int64_t v = get_integer(doc, key, where, kCode);
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
      fail(ErrorCategory::kConfig, kCode, where + "." + key + ": count out of range");
    }
    return static_cast<std::uint32_t>(v);
  };
  const std::string kind = get_string(doc, "kind", where, kCode);
  if (kind == "constant") return constant(count("value"));
  if (kind == "uniform") {
    const auto lo = count("low");
    const auto hi = count("high");
    if (lo > hi) fail(ErrorCategory::kConfig, kCode, where + ": low exceeds high");
    return uniform(lo, hi);
  }
  fail(ErrorCategory::kConfig, kCode, where + ": unknown distribution kind '" + kind + "'");
}

OracleMatcher::OracleMatcher(std::shared_ptr<const PlaceMap> places, CountDistribution same_place,
                             CountDistribution different_place, std::uint64_t seed)
    : places_(std::move(places)), same_(same_place), different_(different_place), seed_(seed) {
  if (!places_) fail(ErrorCategory::kConfig, "config.oracle", "oracle matcher needs a place map");
}

std::uint32_t OracleMatcher::match_count(std::string_view a, std::string_view b) const {
  const bool same = places_->place_of(a) == places_->place_of(b);
  const CountDistribution& dist = same ? same_ : different_;
  if (dist.kind == CountDistribution::Kind::kConstant) return dist.low;
  // Distinct stream from the similarity oracle even when seeds coincide.
  PairRng rng(unordered_pair_seed(seed_ ^ 0x6d61746368ull, a, b));
  return static_cast<std::uint32_t>(rng.uniform_int(dist.low, dist.high));
}

std::string OracleMatcher::describe() const {
  std::ostringstream out;
  out << "oracle(same=" << same_.to_json().dump() << ", different=" << different_.to_json().dump() << ", seed=" << seed_
      << ")";
  return out.str();
}

std::vector<std::size_t> triplet_indices(std::size_t n) {
  if (n == 0) return {};
  std::vector<std::size_t> idx{0, (n - 1) / 2, n - 1};
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

std::vector<std::string> sample_triplet(const Submap& submap) {
  std::vector<std::string> ids;
  for (std::size_t i : triplet_indices(submap.keyframes.size())) ids.push_back(submap.keyframes[i].id);
  return ids;
}

GeometricResult geometric_localization(const Submap& query, std::span<const NodeId> ordered_window,
                                       const TopoGraph& graph, const SessionManifest& session,
                                       const MatchBackend& backend, std::uint32_t threshold) {
  GeometricResult result;
  const std::vector<std::string> query_ids = sample_triplet(query);
  for (NodeId node : ordered_window) {
    for (const std::string& submap_id : graph.node(node).submaps) {
      const std::vector<std::string> cand_ids = sample_triplet(session.submap(submap_id));
      for (const auto& q : query_ids) {
        for (const auto& c : cand_ids) {
          const std::uint32_t count = backend.match_count(q, c);
          ++result.comparisons;
          if (!result.best_count || count > *result.best_count) result.best_count = count;
          if (count > threshold) {
            result.node = node;
            return result;
          }
        }
      }
    }
  }
  return result;
}

}  // namespace topomap
