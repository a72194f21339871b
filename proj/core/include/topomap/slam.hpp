#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/graph.hpp"
#include "topomap/matching.hpp"
#include "topomap/model.hpp"
#include "topomap/similarity.hpp"

namespace topomap {

class SessionManifest;

/// Parameters of the sequential localization loop.
struct SlamConfig {
  std::size_t window_radius = 5;        // m: hops from the previous position
  double similarity_threshold = 0.95;   // th_sim, strict: score_L > th_sim merges
  std::uint32_t match_threshold = 100;  // th_LG, strict: m_LG > th_LG merges
  bool prior_enabled = true;            // off => every node is a candidate
  bool matcher_enabled = true;
  bool retrieval_enabled = true;

  /// Throws Error{kConfig} unless th_sim in [0,1] and at least one trigger
  /// is enabled.
  void validate() const;

  nlohmann::json to_json() const;
  /// Overwrites the fields present in `doc` ("m", "th_sim", "th_lg", "prior",
  /// "matcher", "retrieval"); unknown keys are rejected.
  void apply_json(const nlohmann::json& doc, const std::string& where);

  friend bool operator==(const SlamConfig&, const SlamConfig&) = default;
};

enum class Outcome { kMerged, kNewNode };
enum class Trigger { kGeometric, kRetrieval, kNone };

const char* to_string(Outcome outcome);
const char* to_string(Trigger trigger);

/// One l_sim record: the best window node for one query keyframe.
struct LsimEntry {
  NodeId node;
  double score = 0.0;
};

/// Per-submap outcome with full provenance. Invariants: trigger == kNone iff
/// outcome == kNewNode; a merge's candidate_node equals `node`.
struct LocalizationDecision {
  std::string submap_id;
  Outcome outcome = Outcome::kNewNode;
  NodeId node;               // merge target or the freshly created node
  Trigger trigger = Trigger::kNone;
  NodeId previous_position;  // S_{t-1}; equals `node` for the first submap
  std::optional<double> score_l;
  std::optional<std::uint32_t> best_match_count;
  std::optional<NodeId> candidate_node;
  std::vector<NodeId> window;  // candidate nodes, ascending id
  std::size_t match_comparisons = 0;
  std::size_t similarity_comparisons = 0;  // keyframe-pair backend calls
  std::size_t node_comparisons = 0;        // (query keyframe, node) scorings

  bool merged() const { return outcome == Outcome::kMerged; }
};

nlohmann::json decision_to_json(const LocalizationDecision& decision);

/// Non-owning view of the scoring backends. A backend may be null only when
/// the corresponding trigger is disabled.
struct Backends {
  const SimilarityBackend* similarity = nullptr;
  const MatchBackend* matcher = nullptr;
};

/// Mean of the min(k, n) largest values. Requires a non-empty input.
double mean_top_k(std::vector<double> scores, std::size_t k = 3);

/// Median; even counts average the two central values.
double median(std::vector<double> values);

/// Mean of the top-3 similarities of `query_keyframe` against the
/// keyframes of `submap`.
double submap_score(std::string_view query_keyframe, const Submap& submap, const SimilarityBackend& backend,
                    std::size_t* calls = nullptr);

/// Highest submap_score over the node's submaps.
double node_score(std::string_view query_keyframe, const TopoNode& node, const SessionManifest& session,
                  const SimilarityBackend& backend, std::size_t* calls = nullptr);

/// Majority vote over l_sim. The most frequent node wins; ties go to the
/// higher median score, then the smaller hop distance (looked up in
/// `window`), then the lower id. Returns the node and the median of its
/// own l_sim scores, or nothing for an empty list.
struct RetrievalCandidate {
  NodeId node;
  double score_l = 0.0;
};
std::optional<RetrievalCandidate> aggregate_lsim(std::span<const LsimEntry> lsim, std::span<const WindowEntry> window);

struct RetrievalResult {
  std::optional<RetrievalCandidate> candidate;
  std::vector<LsimEntry> lsim;
  std::size_t similarity_comparisons = 0;
  std::size_t node_comparisons = 0;
};

/// For every query keyframe, records the window node with the highest
/// node_score (ties: lower id) and aggregates via aggregate_lsim.
RetrievalResult retrieval_localization(const Submap& query, std::span<const WindowEntry> window,
                                       const TopoGraph& graph, const SessionManifest& session,
                                       const SimilarityBackend& backend);

/// Candidate window for the next decision: nodes within `window_radius` hops
/// of the current position, or every node when the prior is disabled.
/// Sorted by (hops, id).
std::vector<WindowEntry> candidate_window(const TopoGraph& graph, const SlamConfig& config);

/// Decides where `submap` goes without touching the graph. Geometric
/// verification runs first; retrieval is consulted only when it fails.
LocalizationDecision decide(const Submap& submap, const TopoGraph& graph, const SlamConfig& config,
                            const Backends& backends, const SessionManifest& session);

/// Applies a decision produced by decide() (or the initial one) to `graph`.
void apply_decision(TopoGraph& graph, const LocalizationDecision& decision);

struct SessionRun {
  TopoGraph graph;
  std::vector<LocalizationDecision> decisions;  // one per submap, s_0 included
};

/// Optional per-decision hook, called with the pre-decision graph.
using DecisionObserver = std::function<void(const TopoGraph& before, const LocalizationDecision&)>;

/// Runs the loop over the whole session: s_0 seeds node 0, every later
/// submap goes through decide(). Errors are rethrown prefixed with the id of
/// the submap being processed.
SessionRun run_session(const SessionManifest& session, const SlamConfig& config, const Backends& backends,
                       const DecisionObserver& observer = {});

}  // namespace topomap
