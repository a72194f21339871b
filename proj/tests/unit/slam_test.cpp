#include <gtest/gtest.h>

#include <map>

#include "test_support.hpp"
#include "topomap/slam.hpp"

namespace topomap {
namespace {

using testing::capture_error;
using testing::FnMatcher;
using testing::FnSimilarity;
using testing::make_session;
using testing::owner;

TEST(Aggregation, MeanTopThree) {
  EXPECT_DOUBLE_EQ(mean_top_k({0.9, 0.8, 0.7, 0.1}), (0.9 + 0.8 + 0.7) / 3.0);
  EXPECT_NEAR(mean_top_k({0.9, 0.8, 0.7, 0.1}), 0.8, 1e-12);
  EXPECT_NEAR(mean_top_k({0.6, 0.4}), 0.5, 1e-12);
  EXPECT_EQ(mean_top_k({0.3}), 0.3);
  EXPECT_EQ(mean_top_k({0.1, 0.7, 0.9, 0.8}), mean_top_k({0.9, 0.8, 0.7, 0.1}));
}

TEST(Aggregation, Median) {
  EXPECT_NEAR(median({0.9, 0.7}), 0.8, 1e-12);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({0.5}), 0.5);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
}

TEST(Aggregation, EmptyInputsRejected) {
  EXPECT_EQ(capture_error([] { mean_top_k({}); }).category(), ErrorCategory::kPipeline);
  EXPECT_EQ(capture_error([] { median({}); }).category(), ErrorCategory::kPipeline);
}

TEST(Aggregation, SubmapScoreUsesBackend) {
  const auto session = make_session({{"s", 4}, {"q", 1}});
  const std::map<std::string, double> scores{{"s_k0", 0.9}, {"s_k1", 0.1}, {"s_k2", 0.8}, {"s_k3", 0.7}};
  FnSimilarity sim([&](std::string_view, std::string_view c) { return scores.at(std::string(c)); });
  std::size_t calls = 0;
  EXPECT_NEAR(submap_score("q_k0", session.submap("s"), sim, &calls), 0.8, 1e-12);
  EXPECT_EQ(calls, 4u);
}

TEST(Aggregation, NodeScoreIsMaxOverSubmaps) {
  const auto session = make_session({{"a", 1}, {"b", 1}, {"c", 1}, {"q", 1}});
  const std::map<std::string, double> scores{{"a", 0.4}, {"b", 0.9}, {"c", 0.7}};
  FnSimilarity sim([&](std::string_view, std::string_view c) { return scores.at(owner(c)); });
  EXPECT_EQ(node_score("q_k0", TopoNode{NodeId(0), {"a", "b", "c"}}, session, sim), 0.9);
  EXPECT_EQ(node_score("q_k0", TopoNode{NodeId(0), {"c"}}, session, sim), 0.7);
  FnSimilarity tied([](auto, auto) { return 0.8; });
  EXPECT_EQ(node_score("q_k0", TopoNode{NodeId(0), {"a", "b"}}, session, tied), 0.8);
}

TEST(Lsim, MajorityThenMedian) {
  const std::vector<LsimEntry> lsim{{NodeId(2), 0.9}, {NodeId(2), 0.7}, {NodeId(3), 0.95}};
  const auto c = aggregate_lsim(lsim, {});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->node, NodeId(2));
  EXPECT_NEAR(c->score_l, 0.8, 1e-12);
}

TEST(Lsim, SingleEntry) {
  const std::vector<LsimEntry> lsim{{NodeId(1), 0.9}};
  const auto c = aggregate_lsim(lsim, {});
  EXPECT_EQ(c->node, NodeId(1));
  EXPECT_EQ(c->score_l, 0.9);
}

TEST(Lsim, TieGoesToHigherMedian) {
  const std::vector<LsimEntry> lsim{{NodeId(1), 0.9}, {NodeId(2), 0.8}};
  const auto c = aggregate_lsim(lsim, {});
  EXPECT_EQ(c->node, NodeId(1));
  EXPECT_EQ(c->score_l, 0.9);
}

TEST(Lsim, TieThenHopsThenId) {
  const std::vector<LsimEntry> lsim{{NodeId(4), 0.5}, {NodeId(1), 0.5}, {NodeId(3), 0.5}};
  const std::vector<WindowEntry> window{{NodeId(3), 0}, {NodeId(1), 2}, {NodeId(4), 2}};
  EXPECT_EQ(aggregate_lsim(lsim, window)->node, NodeId(3));
  EXPECT_EQ(aggregate_lsim(lsim, {})->node, NodeId(1));
  const std::vector<WindowEntry> far{{NodeId(3), 3}, {NodeId(1), 2}, {NodeId(4), 2}};
  EXPECT_EQ(aggregate_lsim(lsim, far)->node, NodeId(1));
}

TEST(Lsim, OnlyWinnerEntriesFeedMedian) {
  const std::vector<LsimEntry> lsim{{NodeId(0), 0.2}, {NodeId(0), 0.4}, {NodeId(1), 0.99}, {NodeId(0), 0.9}};
  const auto c = aggregate_lsim(lsim, {});
  EXPECT_EQ(c->node, NodeId(0));
  EXPECT_EQ(c->score_l, 0.4);
}

TEST(Lsim, Empty) { EXPECT_FALSE(aggregate_lsim({}, {})); }

struct TwoNodeWorld {
  // Graph n0 = {a}, n1 = {b}, position n1; query q. Single-keyframe
  // submaps keep submap_score equal to the injected score bit for bit.
  SessionManifest session = make_session({{"a", 1}, {"b", 1}, {"q", 3}});
  TopoGraph graph;
  TwoNodeWorld() {
    graph.create_node("a", NodeId(0));
    graph.create_node("b", NodeId(0));
  }
  const Submap& q() const { return session.submap("q"); }
};

TEST(Retrieval, ArgmaxTiesGoToLowerId) {
  TwoNodeWorld w;
  FnSimilarity sim([](auto, auto) { return 0.6; });
  const auto window = w.graph.all_entries(NodeId(1));
  const auto r = retrieval_localization(w.q(), window, w.graph, w.session, sim);
  ASSERT_EQ(r.lsim.size(), 3u);
  for (const auto& e : r.lsim) EXPECT_EQ(e.node, NodeId(0));
  EXPECT_EQ(r.node_comparisons, 6u);
  EXPECT_EQ(r.similarity_comparisons, 6u);
}

SlamConfig retrieval_only(double th) {
  SlamConfig c;
  c.matcher_enabled = false;
  c.similarity_threshold = th;
  return c;
}

TEST(Decide, RetrievalBoundary) {
  TwoNodeWorld w;
  for (const double score : {0.95, std::nextafter(0.95, 1.0), 0.95 + 1e-9, 0.96}) {
    FnSimilarity sim([&](std::string_view, std::string_view c) { return owner(c) == "a" ? score : 0.0; });
    const auto d = decide(w.q(), w.graph, retrieval_only(0.95), {&sim, nullptr}, w.session);
    ASSERT_TRUE(d.score_l);
    EXPECT_EQ(*d.score_l, score);
    EXPECT_EQ(d.candidate_node, NodeId(0));
    if (score > 0.95) {
      EXPECT_EQ(d.outcome, Outcome::kMerged);
      EXPECT_EQ(d.trigger, Trigger::kRetrieval);
      EXPECT_EQ(d.node, NodeId(0));
    } else {
      EXPECT_EQ(d.outcome, Outcome::kNewNode);
      EXPECT_EQ(d.trigger, Trigger::kNone);
      EXPECT_EQ(d.node, NodeId(2));
    }
  }
}

TEST(Decide, GeometricBoundaryAndPrecedence) {
  TwoNodeWorld w;
  FnSimilarity sim([](std::string_view, std::string_view c) { return owner(c) == "b" ? 1.0 : 0.0; });
  SlamConfig cfg;
  for (const std::uint32_t count : {100u, 101u, 120u}) {
    FnMatcher m([&](std::string_view, std::string_view b) { return owner(b) == "a" ? count : 0u; });
    const auto d = decide(w.q(), w.graph, cfg, {&sim, &m}, w.session);
    EXPECT_EQ(d.best_match_count, count);
    if (count > 100) {
      // Both triggers qualify (retrieval would pick n1); geometric wins.
      EXPECT_EQ(d.trigger, Trigger::kGeometric);
      EXPECT_EQ(d.node, NodeId(0));
      EXPECT_FALSE(d.score_l);
      EXPECT_EQ(d.node_comparisons, 0u);
    } else {
      EXPECT_EQ(d.trigger, Trigger::kRetrieval);
      EXPECT_EQ(d.node, NodeId(1));
    }
  }
}

TEST(Decide, PriorLimitsCandidates) {
  // Chain n0..n4, position n4; only n0 looks right.
  const auto session = make_session({{"s0", 2}, {"s1", 2}, {"s2", 2}, {"s3", 2}, {"s4", 2}, {"q", 2}});
  TopoGraph g;
  for (std::uint32_t i = 0; i < 5; ++i) g.create_node("s" + std::to_string(i), NodeId(i == 0 ? 0 : i - 1));
  FnSimilarity sim([](std::string_view, std::string_view c) { return owner(c) == "s0" ? 1.0 : 0.0; });
  SlamConfig cfg = retrieval_only(0.95);
  cfg.window_radius = 3;
  const auto near = decide(session.submap("q"), g, cfg, {&sim, nullptr}, session);
  EXPECT_EQ(near.outcome, Outcome::kNewNode);
  EXPECT_EQ(near.window.size(), 4u);
  EXPECT_EQ(near.node_comparisons, 2u * 4u);
  cfg.window_radius = 4;
  const auto wide = decide(session.submap("q"), g, cfg, {&sim, nullptr}, session);
  EXPECT_EQ(wide.node, NodeId(0));
  cfg.window_radius = 0;
  cfg.prior_enabled = false;
  const auto all = decide(session.submap("q"), g, cfg, {&sim, nullptr}, session);
  EXPECT_EQ(all.window.size(), 5u);
  EXPECT_EQ(all.node, NodeId(0));
}

TEST(Decide, GeometricSearchFollowsHopsNotIds) {
  // Chain n0..n4 at n4: n1 and n3 both clear th_LG; n3 is nearer.
  const auto session = make_session({{"s0", 2}, {"s1", 2}, {"s2", 2}, {"s3", 2}, {"s4", 2}, {"q", 2}});
  TopoGraph g;
  for (std::uint32_t i = 0; i < 5; ++i) g.create_node("s" + std::to_string(i), NodeId(i == 0 ? 0 : i - 1));
  FnMatcher m([](std::string_view, std::string_view b) {
    return owner(b) == "s1" || owner(b) == "s3" ? 150u : 0u;
  });
  SlamConfig cfg;
  cfg.retrieval_enabled = false;
  for (const bool prior : {true, false}) {
    cfg.prior_enabled = prior;
    const auto d = decide(session.submap("q"), g, cfg, {nullptr, &m}, session);
    EXPECT_EQ(d.node, NodeId(3));
    // n4 (2 keyframes x 2 keyframes) comes first, then n3 stops the search.
    EXPECT_EQ(d.match_comparisons, 5u);
  }
}

TEST(Decide, MissingBackendIsConfigError) {
  TwoNodeWorld w;
  EXPECT_EQ(capture_error([&] { decide(w.q(), w.graph, SlamConfig{}, {}, w.session); }).code(), "config.matcher");
}

TEST(RunSession, SingleSubmap) {
  const auto session = make_session({{"s0", 3}});
  FnSimilarity sim([](auto, auto) { return 1.0; });
  const auto run = run_session(session, retrieval_only(0.95), {&sim, nullptr});
  EXPECT_EQ(run.graph.num_nodes(), 1u);
  EXPECT_EQ(run.graph.num_edges(), 0u);
  ASSERT_EQ(run.decisions.size(), 1u);
  EXPECT_EQ(run.decisions[0].outcome, Outcome::kNewNode);
  EXPECT_EQ(run.decisions[0].trigger, Trigger::kNone);
}

// Places A, B, C, B, A with a perfect oracle.
TEST(RunSession, BackAndForth) {
  const auto session = make_session({{"A1", 3}, {"B1", 3}, {"C1", 3}, {"B2", 3}, {"A2", 3}});
  auto place = [](std::string_view kf) { return kf.front(); };
  FnSimilarity sim([&](std::string_view a, std::string_view b) { return place(a) == place(b) ? 1.0 : 0.0; });
  FnMatcher m([&](std::string_view a, std::string_view b) { return place(a) == place(b) ? 150u : 0u; });
  for (const SlamConfig& cfg : {SlamConfig{}, retrieval_only(0.95)}) {
    const auto run = run_session(session, cfg, {&sim, &m});
    EXPECT_EQ(run.graph.num_nodes(), 3u);
    EXPECT_EQ(run.graph.edges(), (std::set<Edge>{make_edge(NodeId(0), NodeId(1)), make_edge(NodeId(1), NodeId(2))}));
    EXPECT_EQ(run.decisions[3].node, NodeId(1));
    EXPECT_EQ(run.decisions[4].node, NodeId(0));
    EXPECT_TRUE(run.decisions[3].merged());
    EXPECT_TRUE(run.decisions[4].merged());
    EXPECT_EQ(run.graph.position(), NodeId(0));
  }
}

TEST(RunSession, LinearSessionIsChain) {
  std::vector<std::pair<std::string, std::size_t>> spec;
  for (int i = 0; i < 8; ++i) spec.push_back({"p" + std::to_string(i), 4});
  const auto session = make_session(spec);
  FnSimilarity sim([](std::string_view a, std::string_view b) { return owner(a) == owner(b) ? 1.0 : 0.0; });
  FnMatcher m([](std::string_view a, std::string_view b) { return owner(a) == owner(b) ? 150u : 0u; });
  const auto run = run_session(session, SlamConfig{}, {&sim, &m});
  EXPECT_EQ(run.graph.num_nodes(), 8u);
  EXPECT_EQ(run.graph.num_edges(), 7u);
}

TEST(RunSession, ErrorsNameTheSubmap) {
  const auto session = make_session({{"s0", 1}, {"s1", 1}});
  FnSimilarity sim([](auto, auto) -> double { fail(ErrorCategory::kPipeline, "boom", "backend down"); });
  const Error e = capture_error([&] { run_session(session, retrieval_only(0.5), {&sim, nullptr}); });
  EXPECT_EQ(e.code(), "boom");
  EXPECT_NE(std::string(e.what()).find("submap 's1'"), std::string::npos);
}

TEST(Config, Validation) {
  SlamConfig c;
  EXPECT_NO_THROW(c.validate());
  c.similarity_threshold = 1.5;
  EXPECT_EQ(capture_error([&] { c.validate(); }).code(), "config.th_sim");
  c = SlamConfig{};
  c.matcher_enabled = c.retrieval_enabled = false;
  EXPECT_EQ(capture_error([&] { c.validate(); }).code(), "config.triggers");
}

TEST(Config, JsonRoundTrip) {
  SlamConfig c;
  c.window_radius = 3;
  c.similarity_threshold = 0.9;
  c.prior_enabled = false;
  SlamConfig back;
  back.apply_json(c.to_json(), "slam");
  EXPECT_EQ(back, c);
  EXPECT_EQ(capture_error([&] { back.apply_json(nlohmann::json{{"mm", 1}}, "slam"); }).code(), "config.slam");
}

TEST(DecisionJson, CarriesProvenance) {
  LocalizationDecision d;
  d.submap_id = "s3";
  d.outcome = Outcome::kMerged;
  d.trigger = Trigger::kRetrieval;
  d.node = NodeId(1);
  d.candidate_node = NodeId(1);
  d.score_l = 0.97;
  d.window = {NodeId(0), NodeId(1)};
  const auto j = decision_to_json(d);
  EXPECT_EQ(j["submap"], "s3");
  EXPECT_EQ(j["outcome"], "merged");
  EXPECT_EQ(j["trigger"], "retrieval");
  EXPECT_EQ(j["score_l"], 0.97);
  EXPECT_EQ(j["window_size"], 2);
  EXPECT_TRUE(j["best_match_count"].is_null());
}

}  // namespace
}  // namespace topomap
