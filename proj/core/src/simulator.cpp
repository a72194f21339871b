#include "topomap/simulator.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/pair_random.hpp"

namespace topomap::sim {

using nlohmann::json;

namespace {

[[noreturn]] void bad_world(const std::string& code, const std::string& message) {
  fail(ErrorCategory::kConfig, code, "world config: " + message);
}

// Independent streams derived from the world seed.
constexpr std::uint64_t kTraversalStream = 0x7472617665727365ull;
constexpr std::uint64_t kKeyframeStream = 0x6b65796672616d65ull;
constexpr std::uint64_t kSimilarityStream = 0x73696d696c617269ull;
constexpr std::uint64_t kMatcherStream = 0x6d61746368657273ull;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ stream); }

}  // namespace

void WorldConfig::validate() const {
  if (num_places == 0) bad_world("simulator.places", "num_places must be positive");
  if (num_places > static_cast<std::size_t>(std::numeric_limits<int>::max())) bad_world("simulator.places", "too many places");
  if (min_keyframes == 0 || min_keyframes > max_keyframes) {
    bad_world("simulator.keyframes", "keyframe range must satisfy 1 <= min <= max");
  }
  if (descriptor_dim == 0) bad_world("simulator.dim", "descriptor_dim must be positive");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(flip_probability)) bad_world("simulator.noise", "flip probability must lie in [0,1]");
  if (!prob(generated.revisit_probability)) bad_world("simulator.noise", "revisit probability must lie in [0,1]");
  if (!(jitter_sigma >= 0.0)) bad_world("simulator.noise", "jitter sigma must be non-negative");

  for (std::size_t i = 0; i < traversal.size(); ++i) {
    const int p = traversal[i];
    if (p < 0 || static_cast<std::size_t>(p) >= num_places) {
      bad_world("simulator.places", "traversal[" + std::to_string(i) + "] = " + std::to_string(p) + " is out of range");
    }
    if (i > 0 && std::abs(p - traversal[i - 1]) > 1) {
      bad_world("simulator.contiguity", "traversal jumps from place " + std::to_string(traversal[i - 1]) + " to " +
                                            std::to_string(p) + " at step " + std::to_string(i) +
                                            "; consecutive steps may differ by at most one place");
    }
  }
}

json WorldConfig::to_json() const {
  return {{"session_id", session_id},
          {"num_places", num_places},
          {"traversal", traversal},
          {"generated",
           {{"withdrawal", generated.withdrawal},
            {"revisit_probability", generated.revisit_probability},
            {"max_back_jump", generated.max_back_jump}}},
          {"min_keyframes", min_keyframes},
          {"max_keyframes", max_keyframes},
          {"descriptor_dim", descriptor_dim},
          {"p_flip", flip_probability},
          {"sigma", jitter_sigma},
          {"same_place_matches", same_place_matches.to_json()},
          {"different_place_matches", different_place_matches.to_json()},
          {"seed", seed}};
}

WorldConfig WorldConfig::from_json(const json& doc) {
  WorldConfig c;
  try {
    using namespace json_util;
    constexpr const char* kCode = "simulator.format";
    if (!doc.is_object()) bad_world(kCode, "expected an object");
    auto size = [&](const json& obj, const char* key, const std::string& where) {
      const std::int64_t v = get_integer(obj, key, where, kCode);
      if (v < 0) bad_world(kCode, where + "." + key + ": must be non-negative");
      return static_cast<std::size_t>(v);
    };
    if (doc.contains("session_id")) c.session_id = get_string(doc, "session_id", "world", kCode);
    if (doc.contains("num_places")) c.num_places = size(doc, "num_places", "world");
    if (doc.contains("traversal")) {
      for (const auto& v : get_array(doc, "traversal", "world", kCode)) {
        if (!v.is_number_integer()) bad_world(kCode, "world.traversal: expected integers");
        c.traversal.push_back(v.get<int>());
      }
    }
    if (doc.contains("generated")) {
      const json& g = doc.at("generated");
      if (g.contains("withdrawal")) c.generated.withdrawal = get_bool(g, "withdrawal", "world.generated", kCode);
      if (g.contains("revisit_probability")) {
        c.generated.revisit_probability = get_number(g, "revisit_probability", "world.generated", kCode);
      }
      if (g.contains("max_back_jump")) c.generated.max_back_jump = size(g, "max_back_jump", "world.generated");
    }
    if (doc.contains("min_keyframes")) c.min_keyframes = size(doc, "min_keyframes", "world");
    if (doc.contains("max_keyframes")) c.max_keyframes = size(doc, "max_keyframes", "world");
    if (doc.contains("descriptor_dim")) c.descriptor_dim = size(doc, "descriptor_dim", "world");
    if (doc.contains("p_flip")) c.flip_probability = get_number(doc, "p_flip", "world", kCode);
    if (doc.contains("sigma")) c.jitter_sigma = get_number(doc, "sigma", "world", kCode);
    if (doc.contains("same_place_matches")) {
      c.same_place_matches = CountDistribution::from_json(doc.at("same_place_matches"), "world.same_place_matches");
    }
    if (doc.contains("different_place_matches")) {
      c.different_place_matches =
          CountDistribution::from_json(doc.at("different_place_matches"), "world.different_place_matches");
    }
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) bad_world(kCode, "world.seed: expected a non-negative integer");
      c.seed = doc.at("seed").get<std::uint64_t>();
    }
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kFormat) throw Error(ErrorCategory::kConfig, e.code(), e.what());
    throw;
  }
  c.validate();
  return c;
}

std::vector<int> make_traversal(const WorldConfig& config) {
  config.validate();
  if (!config.traversal.empty()) return config.traversal;

  const int last = static_cast<int>(config.num_places) - 1;
  PairRng rng(stream_seed(config.seed, kTraversalStream));
  std::vector<int> steps;

  // After arriving at `p` while sweeping in direction `dir`, optionally back
  // up toward where we came from and return.
  auto excursion = [&](int p, int dir) {
    if (config.generated.max_back_jump == 0 || rng.uniform() >= config.generated.revisit_probability) return;
    const int room = dir > 0 ? p : last - p;
    const int reach = std::min<int>(room, static_cast<int>(config.generated.max_back_jump));
    if (reach <= 0) return;
    const int back = static_cast<int>(rng.uniform_int(1, static_cast<std::uint64_t>(reach)));
    for (int k = 1; k <= back; ++k) steps.push_back(p - dir * k);
    for (int k = back - 1; k >= 0; --k) steps.push_back(p - dir * k);
  };

  for (int p = 0; p <= last; ++p) {
    steps.push_back(p);
    excursion(p, +1);
  }
  if (config.generated.withdrawal) {
    for (int p = last - 1; p >= 0; --p) {
      steps.push_back(p);
      excursion(p, -1);
    }
  }
  return steps;
}

World generate_world(const WorldConfig& config) {
  const std::vector<int> places = make_traversal(config);

  PairRng rng(stream_seed(config.seed, kKeyframeStream));
  std::vector<Submap> submaps;
  submaps.reserve(places.size());
  for (std::size_t i = 0; i < places.size(); ++i) {
    Submap s;
    s.id = "s" + std::to_string(i);
    s.order_index = i;
    const auto n = rng.uniform_int(config.min_keyframes, config.max_keyframes);
    const double start = 6.0 * static_cast<double>(i);
    for (std::uint64_t k = 0; k < n; ++k) {
      s.keyframes.push_back({s.id + "_k" + std::to_string(k), start + static_cast<double>(k) / 3.0});
    }
    submaps.push_back(std::move(s));
  }
  SessionManifest session(config.session_id, config.descriptor_dim, std::move(submaps));

  std::vector<std::string> order;
  for (const auto& s : session.submaps()) order.push_back(s.id);
  GroundTruth gt(order);
  for (std::size_t i = 0; i < places.size(); ++i) {
    for (std::size_t j = i + 1; j < places.size(); ++j) {
      if (places[i] == places[j]) gt.add_covisible(order[i], order[j]);
    }
  }

  PlaceMap place_map;
  for (std::size_t i = 0; i < places.size(); ++i) {
    for (const auto& kf : session.submaps()[i].keyframes) place_map.assign(kf.id, places[i]);
  }

  SimilaritySpec similarity;
  similarity.type = SimilaritySpec::Type::kOracle;
  similarity.noise = {config.flip_probability, config.jitter_sigma, stream_seed(config.seed, kSimilarityStream)};

  MatcherSpec matcher;
  matcher.type = MatcherSpec::Type::kOracle;
  matcher.same_place = config.same_place_matches;
  matcher.different_place = config.different_place_matches;
  matcher.seed = stream_seed(config.seed, kMatcherStream);

  return World{config, places, std::move(session), std::move(gt), std::move(place_map), similarity, matcher};
}

std::vector<ExpectedDecision> expected_decisions(const World& world, const SlamConfig& config) {
  std::vector<ExpectedDecision> out;
  if (world.places.empty()) return out;

  // Node bookkeeping: place of each node plus undirected adjacency.
  std::vector<int> node_place;
  std::vector<std::vector<std::uint32_t>> adj;
  std::uint32_t position = 0;

  auto link = [&](std::uint32_t u, std::uint32_t v) {
    if (u == v) return;
    if (std::find(adj[u].begin(), adj[u].end(), v) == adj[u].end()) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  };

  // Candidate nodes with hop distance, by BFS from the position.
  auto window = [&]() {
    std::vector<std::size_t> dist(node_place.size(), std::numeric_limits<std::size_t>::max());
    std::deque<std::uint32_t> queue{position};
    dist[position] = 0;
    std::vector<std::pair<std::size_t, std::uint32_t>> found;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      if (config.prior_enabled && dist[u] > config.window_radius) continue;
      found.emplace_back(dist[u], u);
      for (auto v : adj[u]) {
        if (dist[v] == std::numeric_limits<std::size_t>::max()) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    std::sort(found.begin(), found.end());
    return found;
  };

  // Noise-free oracles: all same-place pairs share one count, all
  // different-place pairs another.
  const std::uint32_t same_count = world.config.same_place_matches.low;
  const std::uint32_t diff_count = world.config.different_place_matches.low;

  for (std::size_t i = 0; i < world.places.size(); ++i) {
    const int place = world.places[i];
    const std::string& id = world.session.submaps()[i].id;
    if (i == 0) {
      node_place.push_back(place);
      adj.emplace_back();
      out.push_back({id, false, 0, Trigger::kNone});
      continue;
    }

    const auto candidates = window();
    std::optional<std::uint32_t> target;
    Trigger trigger = Trigger::kNone;

    if (config.matcher_enabled) {
      for (const auto& [hops, n] : candidates) {
        const std::uint32_t count = node_place[n] == place ? same_count : diff_count;
        if (count > config.match_threshold) {
          target = n;
          trigger = Trigger::kGeometric;
          break;
        }
      }
    }
    if (!target && config.retrieval_enabled) {
      // Every keyframe votes for the lowest-id node of its own place (score
      // 1), or the lowest-id candidate at score 0 when there is none.
      std::optional<std::uint32_t> best;
      for (const auto& [hops, n] : candidates) {
        if (node_place[n] == place && (!best || n < *best)) best = n;
      }
      const double score = best ? 1.0 : 0.0;
      if (best && score > config.similarity_threshold) {
        target = best;
        trigger = Trigger::kRetrieval;
      }
    }

    if (target) {
      link(position, *target);
      position = *target;
      out.push_back({id, true, *target, trigger});
    } else {
      const auto created = static_cast<std::uint32_t>(node_place.size());
      node_place.push_back(place);
      adj.emplace_back();
      link(position, created);
      position = created;
      out.push_back({id, false, created, Trigger::kNone});
    }
  }
  return out;
}

void write_world(const std::filesystem::path& dir, const World& world, const SlamConfig& slam,
                 const WriteOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::kIo, "io.mkdir", "cannot create '" + dir.string() + "': " + ec.message());

  write_session(dir / "session.json", world.session);
  json_util::write_text(dir / "gt.txt", world.ground_truth.to_text());
  json_util::write_text(dir / "world.json",
                        json_util::dump({{"config", world.config.to_json()}, {"places", world.places}}));

  PipelineConfig cfg;
  cfg.session = "session.json";
  cfg.ground_truth = "gt.txt";
  cfg.slam = slam;
  cfg.similarity = world.similarity_oracle;
  cfg.matcher = world.matcher_oracle;
  json_util::write_text(dir / "config.json", json_util::dump(cfg.to_json()));

  if (!options.tables) return;

  const auto places = std::make_shared<const PlaceMap>(world.place_map);
  const OracleSimilarity similarity(places, world.similarity_oracle.noise);
  const OracleMatcher matcher(places, world.matcher_oracle.same_place, world.matcher_oracle.different_place,
                              world.matcher_oracle.seed);

  ScoreTable scores(true);
  CountTable counts;
  const auto& submaps = world.session.submaps();
  for (std::size_t i = 0; i < submaps.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (const auto& a : submaps[i].keyframes) {
        for (const auto& b : submaps[j].keyframes) scores.insert(a.id, b.id, similarity.similarity(a.id, b.id));
      }
      for (const auto& a : sample_triplet(submaps[i])) {
        for (const auto& b : sample_triplet(submaps[j])) counts.insert(a, b, matcher.match_count(a, b));
      }
    }
  }
  json_util::write_text(dir / "scores.csv", scores.to_text());
  json_util::write_text(dir / "counts.csv", counts.to_text());

  PipelineConfig table_cfg = cfg;
  SimilaritySpec s;
  s.type = SimilaritySpec::Type::kTable;
  s.path = "scores.csv";
  s.missing = MissingEntryPolicy::error();
  MatcherSpec m;
  m.type = MatcherSpec::Type::kTable;
  m.path = "counts.csv";
  m.missing = MissingEntryPolicy::error();
  table_cfg.similarity = s;
  table_cfg.matcher = m;
  json_util::write_text(dir / "config_tables.json", json_util::dump(table_cfg.to_json()));
}

}  // namespace topomap::sim
