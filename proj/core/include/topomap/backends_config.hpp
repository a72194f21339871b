#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topomap/evaluation.hpp"
#include "topomap/matching.hpp"
#include "topomap/similarity.hpp"
#include "topomap/slam.hpp"
#include "topomap/tables.hpp"

namespace topomap {

class GroundTruth;
class SessionManifest;

struct SimilaritySpec {
  enum class Type { kMlp, kTable, kOracle };
  Type type = Type::kOracle;
  std::string weights;      // mlp
  std::string descriptors;  // mlp
  std::string index;        // mlp; empty => "<descriptors>.idx"
  std::string path;         // table
  MissingEntryPolicy missing;
  SimilarityNoise noise;  // oracle

  nlohmann::json to_json() const;
  static SimilaritySpec from_json(const nlohmann::json& doc, const std::string& where);
};

struct MatcherSpec {
  enum class Type { kTable, kOracle };
  Type type = Type::kOracle;
  std::string path;  // table
  MissingEntryPolicy missing;
  CountDistribution same_place = CountDistribution::constant(150);  // oracle
  CountDistribution different_place = CountDistribution::constant(0);
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static MatcherSpec from_json(const nlohmann::json& doc, const std::string& where);
};

/// Whole pipeline configuration document (structured text). Relative paths
/// are resolved against the caller's working directory.
///
///   {
///     "session": "session.json",
///     "ground_truth": "gt.txt",
///     "slam": {"m": 5, "th_sim": 0.95, "th_lg": 100,
///              "prior": true, "matcher": true, "retrieval": true},
///     "similarity": {"type": "mlp" | "table" | "oracle", ...},
///     "matcher": {"type": "table" | "oracle", ...},
///     "variants": [{"name": "...", "slam": {...overrides}}]
///   }
struct PipelineConfig {
  std::string session;
  std::string ground_truth;
  SlamConfig slam;
  std::optional<SimilaritySpec> similarity;
  std::optional<MatcherSpec> matcher;
  std::vector<Variant> variants;  // overrides applied on top of `slam`

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::filesystem::path& path);
};

/// Owning holder for constructed backends.
struct LoadedBackends {
  std::unique_ptr<SimilarityBackend> similarity;
  std::unique_ptr<MatchBackend> matcher;

  Backends view() const { return {similarity.get(), matcher.get()}; }
};

/// Builds and validates the configured backends. Tables are id-checked
/// against the manifest, weights chain-checked, descriptors dim-checked.
/// Oracle backends derive their place map from `gt`, which must be given.
LoadedBackends load_backends(const PipelineConfig& config, const SessionManifest& session, const GroundTruth* gt,
                             const std::filesystem::path& workdir);

}  // namespace topomap
