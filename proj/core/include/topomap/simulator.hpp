#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/backends_config.hpp"
#include "topomap/ground_truth.hpp"
#include "topomap/matching.hpp"
#include "topomap/place_map.hpp"
#include "topomap/session.hpp"
#include "topomap/similarity.hpp"
#include "topomap/slam.hpp"

namespace topomap::sim {

/// Generated motion: a forward sweep 0 -> P-1 followed (optionally) by a
/// withdrawal sweep back to 0. After each new place, with probability
/// `revisit_probability`, the camera backs up between 1 and
/// `max_back_jump` places and returns, one place per submap.
struct GeneratedTraversal {
  bool withdrawal = true;
  double revisit_probability = 0.2;
  std::size_t max_back_jump = 2;
};

struct WorldConfig {
  std::string session_id = "synthetic";
  std::size_t num_places = 10;
  std::vector<int> traversal;  // explicit place per submap; empty => generated
  GeneratedTraversal generated;
  std::size_t min_keyframes = 5;
  std::size_t max_keyframes = 15;
  std::size_t descriptor_dim = 768;
  double flip_probability = 0.0;
  double jitter_sigma = 0.0;
  CountDistribution same_place_matches = CountDistribution::constant(150);
  CountDistribution different_place_matches = CountDistribution::constant(0);
  std::uint64_t seed = 0;

  /// Throws Error{kConfig}: probabilities outside [0,1], empty keyframe
  /// range, places out of range or a non-contiguous explicit traversal
  /// ("simulator.contiguity").
  void validate() const;

  nlohmann::json to_json() const;
  static WorldConfig from_json(const nlohmann::json& doc);
};

struct World {
  WorldConfig config;
  std::vector<int> places;  // place observed by each submap, session order
  SessionManifest session;
  GroundTruth ground_truth;
  PlaceMap place_map;
  SimilaritySpec similarity_oracle;
  MatcherSpec matcher_oracle;
};

/// Place sequence for the config (explicit or generated).
std::vector<int> make_traversal(const WorldConfig& config);

/// One submap per traversal step; submaps are covisible iff they observe
/// the same place. Fully determined by the config (including the seed).
World generate_world(const WorldConfig& config);

struct ExpectedDecision {
  std::string submap_id;
  bool merged = false;
  std::uint32_t node = 0;
  Trigger trigger = Trigger::kNone;
};

/// Ideal decision sequence under noise-free oracles, derived only from
/// place identities and the window rule. Keeps its own adjacency lists and
/// BFS so it can serve as an independent check of the mapping loop.
std::vector<ExpectedDecision> expected_decisions(const World& world, const SlamConfig& config);

struct WriteOptions {
  bool tables = false;  // also emit score/count tables and a table-backed config
};

/// Writes session.json, gt.txt, world.json and config.json (oracle backends)
/// into `dir`; with `tables`, also scores.csv, counts.csv and
/// config_tables.json.
void write_world(const std::filesystem::path& dir, const World& world, const SlamConfig& slam,
                 const WriteOptions& options = {});

}  // namespace topomap::sim
