#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "corpus.hpp"
#include "test_support.hpp"
#include "topomap/json_util.hpp"
#include "topomap/similarity.hpp"

namespace topomap {
namespace {

using testing::capture_error;
using testing::valid_dir;

std::vector<std::byte> bytes_of(const std::string& s) {
  std::vector<std::byte> out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

std::string read_file(const std::filesystem::path& p) { return json_util::read_text(p); }

TEST(Session, LoadsValidManifest) {
  const auto s = load_session(valid_dir() / "session.json");
  EXPECT_EQ(s.session_id(), "fixture");
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.num_keyframes(), 8u);
  EXPECT_EQ(s.descriptor_dim(), 4u);
  EXPECT_EQ(s.submap_of_keyframe("s1_k1"), "s1");
  EXPECT_EQ(s.keyframe_ids().front(), "s0_k0");
  EXPECT_EQ(capture_error([&] { s.submap("nope"); }).code(), "session.unknown_submap");
}

TEST(Session, JsonRoundTrip) {
  const auto s = load_session(valid_dir() / "session.json");
  testing::TempDir dir;
  write_session(dir / "s.json", s);
  const auto back = load_session(dir / "s.json");
  EXPECT_EQ(session_to_json(back), session_to_json(s));
}

TEST(Session, DuplicateKeyframeNamesId) {
  const Error e = capture_error([] {
    SessionManifest("x", 4, {Submap{"a", {{"k", 0.0}}, 0}, Submap{"b", {{"k", 1.0}}, 1}});
  });
  EXPECT_EQ(e.code(), "session.duplicate_keyframe");
  EXPECT_NE(std::string(e.what()).find("'k'"), std::string::npos) << e.what();
}

TEST(Descriptors, ParsesTwoRows) {
  std::string payload = "CSLD";
  auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) payload += static_cast<char>((v >> (8 * i)) & 0xff);
  };
  put(1);
  put(2);
  put(4);
  for (float f : {1.0f, 2.0f, 3.0f, 4.0f, -1.0f, 0.5f, 0.0f, 8.0f}) put(std::bit_cast<std::uint32_t>(f));
  const auto store = parse_descriptors(bytes_of(payload), "a\nb\n", "mem");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 4u);
  EXPECT_EQ(store.at("b")[1], 0.5f);
  EXPECT_EQ(store.at("a")[3], 4.0f);

  const Error e = capture_error([&] { parse_descriptors(bytes_of(payload.substr(0, 30)), "a\nb\n", "mem"); });
  EXPECT_EQ(e.code(), "descriptors.truncated");
  EXPECT_NE(std::string(e.what()).find("byte offset 30"), std::string::npos) << e.what();
}

TEST(Descriptors, ByteIdenticalRoundTrip) {
  const auto path = valid_dir() / "descriptors.csld";
  const auto store = load_descriptors(path, default_index_path(path), load_session(valid_dir() / "session.json"));
  const auto encoded = encode_descriptors(store);
  EXPECT_EQ(std::string(reinterpret_cast<const char*>(encoded.data()), encoded.size()), read_file(path));
  EXPECT_EQ(encode_index(store), read_file(default_index_path(path)));

  testing::TempDir dir;
  write_descriptors(dir / "d.csld", dir / "d.csld.idx", store);
  EXPECT_EQ(read_file(dir / "d.csld"), read_file(path));
}

TEST(Descriptors, DimensionMismatchAgainstManifest) {
  std::vector<Submap> submaps{Submap{"s", {{"k0", 0.0}}, 0}};
  const SessionManifest manifest("x", 768, submaps);
  testing::TempDir dir;
  write_descriptors(dir / "d.csld", dir / "d.idx", DescriptorStore(512, {"k0"}, std::vector<float>(512, 0.0f)));
  EXPECT_EQ(capture_error([&] { load_descriptors(dir / "d.csld", dir / "d.idx", manifest); }).code(),
            "descriptors.dim_mismatch");
}

TEST(Tables, ScoreRoundTrip) {
  ScoreTable t(false);
  t.insert("b", "a", 0.25);
  t.insert("a", "b", 0.1);
  t.insert("a", "c", 1.0 / 3.0);
  const std::string text = t.to_text();
  EXPECT_EQ(text.substr(0, 17), "#symmetric=false\n");
  const ScoreTable back = ScoreTable::parse(text, "mem");
  EXPECT_EQ(back.find("a", "c"), 1.0 / 3.0);
  EXPECT_EQ(back.find("b", "a"), 0.25);
  EXPECT_FALSE(back.find("c", "a"));
  EXPECT_EQ(back.to_text(), text);
}

TEST(Tables, ParseErrorsCarryLine) {
  const Error e = capture_error([] { ScoreTable::parse("#symmetric=true\na,b,0.5\na,c\n", "t.csv"); });
  EXPECT_EQ(e.code(), "scores.record");
  EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos) << e.what();
}

TEST(Tables, CountsNormalizeKeys) {
  const CountTable t = CountTable::parse("# c\nk9,k3,117\n\n", "mem");
  EXPECT_EQ(t.find("k3", "k9"), 117u);
  EXPECT_EQ(CountTable::parse(t.to_text(), "again").find("k9", "k3"), 117u);
}

TEST(GroundTruthFile, LoadsAndSymmetrizes) {
  const auto session = load_session(valid_dir() / "session.json");
  const auto gt = GroundTruth::load(valid_dir() / "gt.txt", session);
  EXPECT_TRUE(gt.covisible("s2", "s0"));
  EXPECT_FALSE(gt.covisible("s1", "s0"));
  EXPECT_EQ(GroundTruth::parse(gt.to_text(), "again", session).pairs(), gt.pairs());
  const auto places = gt.place_map(session);
  EXPECT_EQ(places.place_of("s0_k0"), places.place_of("s2_k2"));
  EXPECT_NE(places.place_of("s0_k0"), places.place_of("s1_k0"));
}

TEST(LoadBackends, MlpAndTable) {
  const auto session = load_session(valid_dir() / "session.json");
  const auto cfg = PipelineConfig::load(valid_dir() / "config.json");
  const auto backends = load_backends(cfg, session, nullptr, valid_dir());
  ASSERT_TRUE(backends.similarity);
  ASSERT_TRUE(backends.matcher);
  EXPECT_EQ(backends.matcher->match_count("s2_k0", "s0_k0"), 140u);
  EXPECT_EQ(backends.matcher->match_count("s2_k0", "s1_k0"), 0u);
  const double s = backends.similarity->similarity("s0_k0", "s1_k1");
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);
}

TEST(LoadBackends, OracleNeedsGroundTruth) {
  const auto session = load_session(valid_dir() / "session.json");
  PipelineConfig cfg;
  cfg.slam.matcher_enabled = false;
  cfg.similarity = SimilaritySpec{};
  cfg.similarity->noise.seed = 7;
  const Error e = capture_error([&] { load_backends(cfg, session, nullptr, valid_dir()); });
  EXPECT_EQ(e.code(), "config.oracle_needs_gt");
  EXPECT_EQ(e.exit_code(), 2);
  const auto gt = GroundTruth::load(valid_dir() / "gt.txt", session);
  EXPECT_EQ(load_backends(cfg, session, &gt, valid_dir()).similarity->similarity("s0_k0", "s2_k1"), 1.0);
}

TEST(LoadBackends, BrokenChainNamesLayers) {
  const Error e = capture_error([] { load_weights(testing::corpus_root() / "malformed/weights/chain.json"); });
  EXPECT_EQ(e.code(), "weights.chain");
  EXPECT_NE(std::string(e.what()).find("layers 0 -> 1"), std::string::npos) << e.what();
}

TEST(PipelineConfigFile, RoundTrip) {
  const auto cfg = PipelineConfig::load(valid_dir() / "config.json");
  EXPECT_EQ(PipelineConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
}

// One fixture per declared error class; each must fail with its code and a
// non-zero exit code.
TEST(MalformedCorpus, EveryFixtureFailsWithItsCode) {
  const auto cases = testing::load_corpus();
  ASSERT_GE(cases.size(), 40u);
  for (const auto& c : cases) {
    const Error e = capture_error([&] { testing::invoke_loader(c); });
    EXPECT_EQ(e.code(), c.code) << c.path << ": " << e.what();
    EXPECT_EQ(e.exit_code(), 2) << c.path;
  }
}

// Random byte-level damage to valid inputs yields success or a structured
// error, never another exception type.
template <typename Loader>
void fuzz(const std::filesystem::path& source, const std::string& name, Loader load, int rounds, std::uint64_t seed) {
  const std::string original = read_file(source);
  std::mt19937_64 rng(seed);
  testing::TempDir dir;
  const auto path = dir / name;
  int structured = 0;
  for (int i = 0; i < rounds; ++i) {
    std::string text = original;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits && !text.empty(); ++k) {
      const std::size_t pos = rng() % text.size();
      switch (rng() % 5) {
        case 0: text[pos] = static_cast<char>(rng() & 0xff); break;
        case 1: text.erase(pos, 1 + rng() % 8); break;
        case 2: text.insert(pos, 1, ",\n\"[]{}:0-e.#"[rng() % 13]); break;
        case 3: text.resize(pos); break;
        default: text.insert(pos, text.substr(rng() % text.size(), 1 + rng() % 16)); break;
      }
    }
    json_util::write_text(path, text);
    try {
      load(path);
    } catch (const Error&) {
      ++structured;
    } catch (const std::exception& e) {
      ADD_FAILURE() << name << " round " << i << ": unstructured " << typeid(e).name() << ": " << e.what();
      return;
    }
  }
  EXPECT_GT(structured, 0);
}

TEST(LoaderTotality, RandomDamage) {
  const auto session = load_session(valid_dir() / "session.json");
  fuzz(valid_dir() / "session.json", "session.json", [](const auto& p) { load_session(p); }, 1500, 1);
  fuzz(valid_dir() / "weights.json", "weights.json", [](const auto& p) { load_weights(p); }, 1500, 2);
  fuzz(valid_dir() / "config.json", "config.json", [](const auto& p) { PipelineConfig::load(p); }, 1500, 3);
  fuzz(valid_dir() / "scores.csv", "scores.csv",
       [&](const auto& p) { ScoreTable::load(p).check_ids(session, "f"); }, 1500, 4);
  fuzz(valid_dir() / "counts.csv", "counts.csv",
       [&](const auto& p) { CountTable::load(p).check_ids(session, "f"); }, 1500, 5);
  fuzz(valid_dir() / "gt.txt", "gt.txt", [&](const auto& p) { GroundTruth::load(p, session); }, 1500, 6);
  const auto idx = valid_dir() / "descriptors.csld.idx";
  fuzz(valid_dir() / "descriptors.csld", "d.csld",
       [&](const auto& p) { load_descriptors(p, idx, session); }, 1500, 7);
  const auto csld = valid_dir() / "descriptors.csld";
  fuzz(idx, "d.idx", [&](const auto& p) { load_descriptors(csld, p, session); }, 1500, 8);
}

}  // namespace
}  // namespace topomap
