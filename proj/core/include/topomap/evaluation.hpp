#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/ground_truth.hpp"
#include "topomap/slam.hpp"

namespace topomap {

class SessionManifest;

enum class Label { kTruePositive, kFalsePositive, kFalseNegative, kTrueNegative };

const char* to_string(Label label);

/// Number of submaps of `node` covisible with `submap_id`.
std::size_t covisible_members(const TopoNode& node, const std::string& submap_id, const GroundTruth& gt);

/// Strict majority of the node's submaps covisible with `submap_id`.
bool has_covisible_majority(const TopoNode& node, const std::string& submap_id, const GroundTruth& gt);

/// Labels a decision against the graph as it was before the decision.
/// Merge: TP iff the target had a covisible majority, else FP.
/// New node: FN iff some existing node had a covisible majority, else TN.
Label classify_decision(const LocalizationDecision& decision, const TopoGraph& before, const GroundTruth& gt);

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  void add(Label label);
  std::size_t total() const { return tp + fp + fn + tn; }

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

/// Undefined ratios (zero denominator) are nullopt, never 0 or NaN.
struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall precision_recall(const EvalCounts& counts);

/// Renders a ratio for reports; undefined prints as "n/a".
std::string format_ratio(const std::optional<double>& value);

/// Replays a decision log on a fresh graph and labels every decision but
/// the first.
struct SessionLabels {
  std::vector<Label> labels;  // aligned with decisions[1..]
  EvalCounts counts;
};
SessionLabels classify_session(const std::vector<LocalizationDecision>& decisions, const GroundTruth& gt);

struct Variant {
  std::string name;
  SlamConfig config;
};

/// Ablation rows in the usual order: matcher, matcher + prior, retrieval,
/// retrieval + prior, retrieval + prior + matcher. Thresholds and m are
/// taken from `base`.
std::vector<Variant> ablation_variants(const SlamConfig& base);

struct VariantResult {
  Variant variant;
  EvalCounts counts;
  PrecisionRecall pr;
  std::size_t merges = 0;
  std::size_t new_nodes = 0;  // s_0 excluded
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::size_t match_comparisons = 0;
  std::size_t similarity_comparisons = 0;
  std::size_t node_comparisons = 0;
  double wall_seconds = 0.0;
  SessionRun run;
  std::vector<Label> labels;
};

struct EvalReport {
  std::string session_id;
  std::vector<VariantResult> rows;

  /// Machine-readable table, one row per variant.
  std::string to_csv() const;
  /// Counts, ratios, telemetry and config echo per variant.
  nlohmann::json to_json() const;
  /// Fixed-width human summary, one line per variant.
  std::string summary() const;
};

/// Runs every variant (concurrently when `parallel`) and evaluates it.
/// Results are in variant order regardless of scheduling.
EvalReport evaluate_session(const SessionManifest& session, const GroundTruth& gt, const std::vector<Variant>& variants,
                            const Backends& backends, bool parallel = true);

}  // namespace topomap
