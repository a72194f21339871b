#include "topomap/evaluation.hpp"

#include <chrono>
#include <cstdio>
#include <future>
#include <iomanip>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/session.hpp"

namespace topomap {

using nlohmann::json;

const char* to_string(Label label) {
  switch (label) {
    case Label::kTruePositive:
      return "TP";
    case Label::kFalsePositive:
      return "FP";
    case Label::kFalseNegative:
      return "FN";
    case Label::kTrueNegative:
      return "TN";
  }
  return "?";
}

std::size_t covisible_members(const TopoNode& node, const std::string& submap_id, const GroundTruth& gt) {
  std::size_t count = 0;
  for (const auto& member : node.submaps) {
    if (gt.covisible(member, submap_id)) ++count;
  }
  return count;
}

bool has_covisible_majority(const TopoNode& node, const std::string& submap_id, const GroundTruth& gt) {
  return 2 * covisible_members(node, submap_id, gt) > node.submaps.size();
}

Label classify_decision(const LocalizationDecision& decision, const TopoGraph& before, const GroundTruth& gt) {
  if (!gt.contains(decision.submap_id)) {
    fail(ErrorCategory::kPipeline, "gt.unknown_id", "ground truth has no submap '" + decision.submap_id + "'");
  }
  if (decision.merged()) {
    return has_covisible_majority(before.node(decision.node), decision.submap_id, gt) ? Label::kTruePositive
                                                                                      : Label::kFalsePositive;
  }
  for (const auto& node : before.nodes()) {
    if (has_covisible_majority(node, decision.submap_id, gt)) return Label::kFalseNegative;
  }
  return Label::kTrueNegative;
}

void EvalCounts::add(Label label) {
  switch (label) {
    case Label::kTruePositive:
      ++tp;
      break;
    case Label::kFalsePositive:
      ++fp;
      break;
    case Label::kFalseNegative:
      ++fn;
      break;
    case Label::kTrueNegative:
      ++tn;
      break;
  }
}

PrecisionRecall precision_recall(const EvalCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

std::string format_ratio(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *value);
  return buf;
}

SessionLabels classify_session(const std::vector<LocalizationDecision>& decisions, const GroundTruth& gt) {
  SessionLabels out;
  TopoGraph graph;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    if (i > 0) {
      const Label label = classify_decision(d, graph, gt);
      out.labels.push_back(label);
      out.counts.add(label);
    }
    apply_decision(graph, d);
  }
  return out;
}

std::vector<Variant> ablation_variants(const SlamConfig& base) {
  auto make = [&](const char* name, bool prior, bool matcher, bool retrieval) {
    SlamConfig c = base;
    c.prior_enabled = prior;
    c.matcher_enabled = matcher;
    c.retrieval_enabled = retrieval;
    return Variant{name, c};
  };
  return {
      make("matcher", false, true, false),
      make("matcher + prior", true, true, false),
      make("retrieval", false, false, true),
      make("retrieval + prior", true, false, true),
      make("retrieval + prior + matcher", true, true, true),
  };
}

namespace {

VariantResult run_variant(const SessionManifest& session, const GroundTruth& gt, const Variant& variant,
                          const Backends& backends) {
  VariantResult r;
  r.variant = variant;
  const auto start = std::chrono::steady_clock::now();
  r.run = run_session(session, variant.config, backends);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  SessionLabels labels = classify_session(r.run.decisions, gt);
  r.labels = std::move(labels.labels);
  r.counts = labels.counts;
  r.pr = precision_recall(r.counts);
  r.num_nodes = r.run.graph.num_nodes();
  r.num_edges = r.run.graph.num_edges();
  for (std::size_t i = 0; i < r.run.decisions.size(); ++i) {
    const auto& d = r.run.decisions[i];
    if (i > 0) (d.merged() ? r.merges : r.new_nodes)++;
    r.match_comparisons += d.match_comparisons;
    r.similarity_comparisons += d.similarity_comparisons;
    r.node_comparisons += d.node_comparisons;
  }
  return r;
}

}  // namespace

EvalReport evaluate_session(const SessionManifest& session, const GroundTruth& gt, const std::vector<Variant>& variants,
                            const Backends& backends, bool parallel) {
  for (const auto& v : variants) {
    try {
      v.config.validate();
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), "variant '" + v.name + "': " + e.what());
    }
  }

  EvalReport report;
  report.session_id = session.session_id();
  if (!parallel || variants.size() < 2) {
    for (const auto& v : variants) report.rows.push_back(run_variant(session, gt, v, backends));
    return report;
  }
  std::vector<std::future<VariantResult>> futures;
  futures.reserve(variants.size());
  for (const auto& v : variants) {
    futures.push_back(std::async(std::launch::async, [&, v] { return run_variant(session, gt, v, backends); }));
  }
  for (auto& f : futures) report.rows.push_back(f.get());
  return report;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "variant,prior,matcher,retrieval,m,th_sim,th_lg,tp,fp,fn,tn,precision,recall,nodes,edges,"
         "match_comparisons,similarity_comparisons,node_comparisons,wall_seconds\n";
  for (const auto& r : rows) {
    const auto& c = r.variant.config;
    out << r.variant.name << ',' << c.prior_enabled << ',' << c.matcher_enabled << ',' << c.retrieval_enabled << ','
        << c.window_radius << ',' << c.similarity_threshold << ',' << c.match_threshold << ',' << r.counts.tp << ','
        << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.tn << ',' << format_ratio(r.pr.precision) << ','
        << format_ratio(r.pr.recall) << ',' << r.num_nodes << ',' << r.num_edges << ',' << r.match_comparisons << ','
        << r.similarity_comparisons << ',' << r.node_comparisons << ',' << std::fixed << std::setprecision(6)
        << r.wall_seconds << std::defaultfloat << '\n';
  }
  return out.str();
}

json EvalReport::to_json() const {
  auto ratio = [](const std::optional<double>& v) -> json { return v ? json(*v) : json("n/a"); };
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"variant", r.variant.name},
                     {"config", r.variant.config.to_json()},
                     {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
                     {"precision", ratio(r.pr.precision)},
                     {"recall", ratio(r.pr.recall)},
                     {"merges", r.merges},
                     {"new_nodes", r.new_nodes},
                     {"nodes", r.num_nodes},
                     {"edges", r.num_edges},
                     {"match_comparisons", r.match_comparisons},
                     {"similarity_comparisons", r.similarity_comparisons},
                     {"node_comparisons", r.node_comparisons},
                     {"wall_seconds", r.wall_seconds}});
  }
  return {{"format", "topomap-eval"}, {"version", 1}, {"session_id", session_id}, {"variants", std::move(jrows)}};
}

std::string EvalReport::summary() const {
  std::ostringstream out;
  out << "session " << session_id << "\n";
  out << std::left << std::setw(30) << "variant" << std::right << std::setw(10) << "precision" << std::setw(10)
      << "recall" << std::setw(6) << "TP" << std::setw(6) << "FP" << std::setw(6) << "FN" << std::setw(6) << "TN"
      << std::setw(7) << "nodes" << std::setw(12) << "runtime\n";
  for (const auto& r : rows) {
    char runtime[32];
    std::snprintf(runtime, sizeof(runtime), "%.3f s", r.wall_seconds);
    out << std::left << std::setw(30) << r.variant.name << std::right << std::setw(10) << format_ratio(r.pr.precision)
        << std::setw(10) << format_ratio(r.pr.recall) << std::setw(6) << r.counts.tp << std::setw(6) << r.counts.fp
        << std::setw(6) << r.counts.fn << std::setw(6) << r.counts.tn << std::setw(7) << r.num_nodes << std::setw(11)
        << runtime << "\n";
  }
  return out.str();
}

}  // namespace topomap
