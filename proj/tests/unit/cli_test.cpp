#include <gtest/gtest.h>

#include <sstream>

#include "cli/app.hpp"
#include "corpus.hpp"
#include "test_support.hpp"
#include "topomap/graph_io.hpp"
#include "topomap/json_util.hpp"

namespace topomap {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "topomap");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  std::string wd() const { return dir.path().string(); }

  void simulate(std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"simulate", "--workdir", wd(), "--out", "world", "--seed", "4"};
    if (std::find(extra.begin(), extra.end(), "--places") == extra.end()) extra.insert(extra.end(), {"--places", "7"});
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

TEST_F(CliTest, BuildFromSimulatedWorld) {
  simulate();
  const auto r = run({"build", "--workdir", wd() + "/world", "--config", "config.json", "--out", "o"});
  ASSERT_EQ(r.code, 0) << r.err;
  const TopoGraph g = read_graph(dir / "world/o/graph.json");
  EXPECT_EQ(g.num_nodes(), 7u);  // one node per distinct place
  const std::string log = json_util::read_text(dir / "world/o/decisions.jsonl");
  const auto session = load_session(dir / "world/session.json");
  EXPECT_EQ(static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n')), session.size() + 1);
  const auto header = nlohmann::json::parse(log.substr(0, log.find('\n')));
  EXPECT_EQ(header["type"], "header");
  EXPECT_EQ(header["provenance"]["config"]["slam"]["m"], 5);
}

TEST_F(CliTest, BuildIsByteReproducible) {
  simulate({"--p-flip", "0.1", "--sigma", "0.05"});
  const std::vector<std::string> args{"build", "--workdir", wd() + "/world", "--config", "config.json",
                                      "--m",   "3",         "--out",          "a"};
  ASSERT_EQ(run(args).code, 0);
  const std::string graph = json_util::read_text(dir / "world/a/graph.json");
  const std::string log = json_util::read_text(dir / "world/a/decisions.jsonl");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(json_util::read_text(dir / "world/a/graph.json"), graph);
  EXPECT_EQ(json_util::read_text(dir / "world/a/decisions.jsonl"), log);
}

TEST_F(CliTest, FlagsOverrideConfigAndAreEchoed) {
  simulate();
  const auto r = run({"build", "--workdir", wd() + "/world", "--config", "config.json", "--out", "o", "--m", "0",
                      "--no-prior", "--th-sim", "0.5", "--no-matcher"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json_util::read(dir / "world/o/graph.json", "x");
  const auto& slam = doc["provenance"]["config"]["slam"];
  EXPECT_EQ(slam["m"], 0);
  EXPECT_EQ(slam["prior"], false);
  EXPECT_EQ(slam["matcher"], false);
  EXPECT_EQ(slam["th_sim"], 0.5);
  EXPECT_NE(doc["provenance"]["flags"].dump().find("--no-prior"), std::string::npos);
  // Prior disabled: the window spans every node regardless of m = 0.
  std::istringstream lines(json_util::read_text(dir / "world/o/decisions.jsonl"));
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);  // s_0
  std::size_t nodes = 1;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec["window_size"].get<std::size_t>(), nodes);
    if (rec["outcome"] == "new_node") ++nodes;
  }
  EXPECT_EQ(read_graph(dir / "world/o/graph.json").num_nodes(), 7u);
}

TEST_F(CliTest, EvalWritesReport) {
  simulate();
  const auto r = run({"eval", "--workdir", wd() + "/world", "--config", "config.json", "--out", "e"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("retrieval + prior + matcher"), std::string::npos);
  const std::string csv = json_util::read_text(dir / "world/e/report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  const auto report = json_util::read(dir / "world/e/report.json", "x");
  for (const auto& row : report["variants"]) {
    EXPECT_EQ(row["precision"], 1.0);
    EXPECT_EQ(row["recall"], 1.0);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "world/e/decisions_retrieval_prior_matcher.jsonl"));
}

TEST_F(CliTest, EvalUsesConfiguredVariants) {
  simulate();
  auto cfg = json_util::read(dir / "world/config.json", "x");
  cfg["variants"] = nlohmann::json::parse(
      R"([{"name": "a"}, {"name": "b", "slam": {"m": 1}}, {"name": "blind", "slam": {"retrieval": false, "th_lg": 1000}}])");
  json_util::write_text(dir / "world/variants.json", cfg.dump());
  const auto r = run({"eval", "--workdir", wd() + "/world", "--config", "variants.json", "--out", "v"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = json_util::read_text(dir / "world/v/report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  // A matcher that never clears th_LG localizes nothing: precision is undefined.
  const auto report = json_util::read(dir / "world/v/report.json", "x");
  EXPECT_EQ(report["variants"][2]["precision"], "n/a");
  EXPECT_NE(r.out.find("n/a"), std::string::npos);
}

TEST_F(CliTest, ExportDot) {
  simulate({"--traversal", "0,1,2", "--places", "3"});
  ASSERT_EQ(run({"build", "--workdir", wd() + "/world", "--config", "config.json", "--out", "o"}).code, 0);
  const auto a = run({"export-dot", "--workdir", wd(), "--graph", "world/o/graph.json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("n0 -- n1;\n  n1 -- n2;"), std::string::npos) << a.out;
  ASSERT_EQ(run({"export-dot", "--workdir", wd(), "--graph", "world/o/graph.json", "--out", "g.dot"}).code, 0);
  EXPECT_EQ(json_util::read_text(dir / "g.dot"), a.out);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"build", "--m", "minus-one"}).code, 2);
  EXPECT_EQ(run({"build", "--help"}).code, 0);

  const auto missing = run({"build", "--workdir", wd(), "--session", "nope.json"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.json"), std::string::npos);

  simulate();
  EXPECT_EQ(run({"build", "--workdir", wd() + "/world", "--config", "config.json", "--th-sim", "1.2"}).code, 2);
  EXPECT_EQ(run({"build", "--workdir", wd() + "/world", "--config", "config.json", "--no-matcher", "--no-retrieval"}).code,
            2);
  EXPECT_EQ(run({"build", "--workdir", wd() + "/world", "--session", "session.json", "--similarity", "oracle",
                 "--no-matcher"})
                .code,
            2);  // oracle without ground truth
  EXPECT_EQ(run({"export-dot", "--workdir", wd(), "--graph", "world/session.json"}).code, 2);

  // Missing descriptors with the learned backend: exit 2, path named.
  const auto v = testing::valid_dir().string();
  const auto nodesc = run({"build", "--workdir", v, "--session", "session.json", "--similarity", "mlp", "--weights",
                           "weights.json", "--descriptors", "absent.csld", "--no-matcher", "--out", wd() + "/x"});
  EXPECT_EQ(nodesc.code, 2);
  EXPECT_NE(nodesc.err.find("absent.csld"), std::string::npos) << nodesc.err;
}

TEST_F(CliTest, PipelineFailureExitsOne) {
  // A sparse score table with the error policy fails mid-run.
  const auto v = testing::valid_dir().string();
  json_util::write_text(dir / "sparse.csv", "#symmetric=true\ns0_k0,s1_k0,0.5\n");
  const auto r = run({"build", "--workdir", v, "--session", "session.json", "--similarity", "table", "--scores",
                      (dir / "sparse.csv").string(), "--no-matcher", "--out", wd() + "/o"});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.err.find("scores.missing"), std::string::npos) << r.err;
}

TEST_F(CliTest, MlpBuildOnFixtures) {
  const auto v = testing::valid_dir().string();
  const auto r = run({"build", "--workdir", v, "--config", "config.json", "--out", wd() + "/o"});
  ASSERT_EQ(r.code, 0) << r.err;
  const TopoGraph g = read_graph(dir / "o/graph.json");
  // s2 matches s0 geometrically (140 > 100).
  EXPECT_EQ(g.owner_of("s2"), g.owner_of("s0"));
}

}  // namespace
}  // namespace topomap
