#include "topomap/slam.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/session.hpp"

namespace topomap {

using nlohmann::json;

void SlamConfig::validate() const {
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
    fail(ErrorCategory::kConfig, "config.th_sim", "th_sim must lie in [0,1]");
  }
  if (!matcher_enabled && !retrieval_enabled) {
    fail(ErrorCategory::kConfig, "config.triggers", "at least one of matcher/retrieval must be enabled");
  }
}

json SlamConfig::to_json() const {
  return {{"m", window_radius},         {"th_sim", similarity_threshold}, {"th_lg", match_threshold},
          {"prior", prior_enabled},     {"matcher", matcher_enabled},     {"retrieval", retrieval_enabled}};
}

void SlamConfig::apply_json(const json& doc, const std::string& where) {
  constexpr const char* kCode = "config.slam";
  if (!doc.is_object()) fail(ErrorCategory::kConfig, kCode, where + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string field = where + "." + key;
    auto need = [&](bool ok, const char* what) {
      if (!ok) fail(ErrorCategory::kConfig, kCode, field + ": expected " + what);
    };
    if (key == "m") {
      need(value.is_number_unsigned(), "a non-negative integer");
      window_radius = value.get<std::size_t>();
    } else if (key == "th_sim") {
      need(value.is_number(), "a number");
      similarity_threshold = value.get<double>();
    } else if (key == "th_lg") {
      need(value.is_number_unsigned() && value.get<std::uint64_t>() <= std::numeric_limits<std::uint32_t>::max(),
           "a non-negative 32-bit integer");
      match_threshold = value.get<std::uint32_t>();
    } else if (key == "prior") {
      need(value.is_boolean(), "a boolean");
      prior_enabled = value.get<bool>();
    } else if (key == "matcher") {
      need(value.is_boolean(), "a boolean");
      matcher_enabled = value.get<bool>();
    } else if (key == "retrieval") {
      need(value.is_boolean(), "a boolean");
      retrieval_enabled = value.get<bool>();
    } else {
      fail(ErrorCategory::kConfig, kCode, field + ": unknown setting");
    }
  }
}

const char* to_string(Outcome outcome) { return outcome == Outcome::kMerged ? "merged" : "new_node"; }

const char* to_string(Trigger trigger) {
  switch (trigger) {
    case Trigger::kGeometric:
      return "geometric";
    case Trigger::kRetrieval:
      return "retrieval";
    case Trigger::kNone:
      return "none";
  }
  return "none";
}

json decision_to_json(const LocalizationDecision& d) {
  auto opt = [](const auto& v) -> json {
    if (!v) return nullptr;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, NodeId>) {
      return v->value;
    } else {
      return *v;
    }
  };
  return {{"submap", d.submap_id},
          {"outcome", to_string(d.outcome)},
          {"node", d.node.value},
          {"trigger", to_string(d.trigger)},
          {"previous_position", d.previous_position.value},
          {"score_l", opt(d.score_l)},
          {"best_match_count", opt(d.best_match_count)},
          {"candidate_node", opt(d.candidate_node)},
          {"window_size", d.window.size()},
          {"match_comparisons", d.match_comparisons},
          {"similarity_comparisons", d.similarity_comparisons},
          {"node_comparisons", d.node_comparisons}};
}

double mean_top_k(std::vector<double> scores, std::size_t k) {
  if (scores.empty()) fail(ErrorCategory::kPipeline, "slam.empty_scores", "cannot aggregate an empty score list");
  const std::size_t take = std::min(k, scores.size());
  std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(take), scores.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += scores[i];
  return sum / static_cast<double>(take);
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCategory::kPipeline, "slam.empty_scores", "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double submap_score(std::string_view query_keyframe, const Submap& submap, const SimilarityBackend& backend,
                    std::size_t* calls) {
  std::vector<double> scores;
  scores.reserve(submap.keyframes.size());
  for (const auto& kf : submap.keyframes) scores.push_back(backend.similarity(query_keyframe, kf.id));
  if (calls) *calls += scores.size();
  return mean_top_k(std::move(scores), 3);
}

double node_score(std::string_view query_keyframe, const TopoNode& node, const SessionManifest& session,
                  const SimilarityBackend& backend, std::size_t* calls) {
  if (node.submaps.empty()) fail(ErrorCategory::kPipeline, "slam.empty_node", "node without submaps");
  double best = -1.0;
  for (const auto& submap_id : node.submaps) {
    best = std::max(best, submap_score(query_keyframe, session.submap(submap_id), backend, calls));
  }
  return best;
}

std::optional<RetrievalCandidate> aggregate_lsim(std::span<const LsimEntry> lsim, std::span<const WindowEntry> window) {
  if (lsim.empty()) return std::nullopt;

  std::map<NodeId, std::vector<double>> by_node;
  for (const auto& e : lsim) by_node[e.node].push_back(e.score);

  auto hops_of = [&](NodeId n) {
    for (const auto& w : window) {
      if (w.node == n) return w.hops;
    }
    return std::numeric_limits<std::size_t>::max();
  };

  std::optional<RetrievalCandidate> best;
  std::size_t best_count = 0;
  std::size_t best_hops = 0;
  // std::map iterates ascending ids, so keeping the incumbent on a full tie
  // prefers the lower id.
  for (const auto& [node, scores] : by_node) {
    const double med = median(scores);
    const std::size_t hops = hops_of(node);
    bool better = false;
    if (!best || scores.size() > best_count) {
      better = true;
    } else if (scores.size() == best_count) {
      if (med > best->score_l) {
        better = true;
      } else if (med == best->score_l && hops < best_hops) {
        better = true;
      }
    }
    if (better) {
      best = RetrievalCandidate{node, med};
      best_count = scores.size();
      best_hops = hops;
    }
  }
  return best;
}

RetrievalResult retrieval_localization(const Submap& query, std::span<const WindowEntry> window,
                                       const TopoGraph& graph, const SessionManifest& session,
                                       const SimilarityBackend& backend) {
  RetrievalResult result;
  if (window.empty()) return result;

  std::vector<NodeId> by_id;
  by_id.reserve(window.size());
  for (const auto& w : window) by_id.push_back(w.node);
  std::sort(by_id.begin(), by_id.end());

  for (const auto& kf : query.keyframes) {
    std::optional<LsimEntry> best;
    for (NodeId n : by_id) {
      const double score = node_score(kf.id, graph.node(n), session, backend, &result.similarity_comparisons);
      ++result.node_comparisons;
      if (!best || score > best->score) best = LsimEntry{n, score};
    }
    result.lsim.push_back(*best);
  }
  result.candidate = aggregate_lsim(result.lsim, window);
  return result;
}

std::vector<WindowEntry> candidate_window(const TopoGraph& graph, const SlamConfig& config) {
  const NodeId prev = graph.position();
  return config.prior_enabled ? graph.window_entries(prev, config.window_radius) : graph.all_entries(prev);
}

LocalizationDecision decide(const Submap& submap, const TopoGraph& graph, const SlamConfig& config,
                            const Backends& backends, const SessionManifest& session) {
  if (graph.empty()) fail(ErrorCategory::kPipeline, "slam.empty_graph", "decide() needs a seeded graph");

  LocalizationDecision d;
  d.submap_id = submap.id;
  d.previous_position = graph.position();

  const std::vector<WindowEntry> window = candidate_window(graph, config);
  std::vector<NodeId> ordered;
  ordered.reserve(window.size());
  for (const auto& w : window) ordered.push_back(w.node);
  d.window = ordered;
  std::sort(d.window.begin(), d.window.end());

  if (config.matcher_enabled) {
    if (!backends.matcher) fail(ErrorCategory::kConfig, "config.matcher", "matcher enabled without a match backend");
    const GeometricResult geo =
        geometric_localization(submap, ordered, graph, session, *backends.matcher, config.match_threshold);
    d.best_match_count = geo.best_count;
    d.match_comparisons = geo.comparisons;
    if (geo.node) {
      d.outcome = Outcome::kMerged;
      d.trigger = Trigger::kGeometric;
      d.node = *geo.node;
      d.candidate_node = *geo.node;
      return d;
    }
  }

  if (config.retrieval_enabled) {
    if (!backends.similarity) {
      fail(ErrorCategory::kConfig, "config.similarity", "retrieval enabled without a similarity backend");
    }
    const RetrievalResult ret = retrieval_localization(submap, window, graph, session, *backends.similarity);
    d.similarity_comparisons = ret.similarity_comparisons;
    d.node_comparisons = ret.node_comparisons;
    if (ret.candidate) {
      d.score_l = ret.candidate->score_l;
      d.candidate_node = ret.candidate->node;
      if (ret.candidate->score_l > config.similarity_threshold) {
        d.outcome = Outcome::kMerged;
        d.trigger = Trigger::kRetrieval;
        d.node = ret.candidate->node;
        return d;
      }
    }
  }

  d.outcome = Outcome::kNewNode;
  d.trigger = Trigger::kNone;
  d.node = NodeId{static_cast<std::uint32_t>(graph.num_nodes())};
  return d;
}

void apply_decision(TopoGraph& graph, const LocalizationDecision& decision) {
  if (decision.merged()) {
    graph.merge_into_node(decision.submap_id, decision.node, decision.previous_position);
    return;
  }
  const NodeId created = graph.create_node(decision.submap_id, decision.previous_position);
  if (created != decision.node) {
    fail(ErrorCategory::kPipeline, "slam.stale_decision",
         "decision for '" + decision.submap_id + "' was made against a different graph state");
  }
}

SessionRun run_session(const SessionManifest& session, const SlamConfig& config, const Backends& backends,
                       const DecisionObserver& observer) {
  config.validate();
  SessionRun run;
  run.decisions.reserve(session.size());
  for (const Submap& submap : session.submaps()) {
    try {
      LocalizationDecision d;
      if (run.graph.empty()) {
        d.submap_id = submap.id;
        d.outcome = Outcome::kNewNode;
        d.trigger = Trigger::kNone;
      } else {
        d = decide(submap, run.graph, config, backends, session);
      }
      if (observer) observer(run.graph, d);
      apply_decision(run.graph, d);
      run.decisions.push_back(std::move(d));
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), "submap '" + submap.id + "': " + e.what());
    }
  }
  return run;
}

}  // namespace topomap
