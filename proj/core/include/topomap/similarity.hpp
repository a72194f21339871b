#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "topomap/descriptors.hpp"
#include "topomap/mlp.hpp"
#include "topomap/place_map.hpp"
#include "topomap/tables.hpp"

namespace topomap {

/// Scores whether two keyframes image the same place. Implementations are
/// read-only after construction and safe to share across threads; every
/// score lies in [0, 1].
///
/// Arguments are ordered (query, candidate): the learned backend feeds
/// d_query - d_candidate to the classifier, so it need not be symmetric.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual double similarity(std::string_view query, std::string_view candidate) const = 0;
  virtual std::string describe() const = 0;
};

/// Classifier head on descriptor differences.
class MlpSimilarity final : public SimilarityBackend {
 public:
  /// Throws Error{kConfig} if weights.input_dim differs from the store's dim.
  MlpSimilarity(MlpWeights weights, std::shared_ptr<const DescriptorStore> store);

  double similarity(std::string_view query, std::string_view candidate) const override;
  std::string describe() const override;

  const MlpWeights& weights() const { return weights_; }

 private:
  MlpWeights weights_;
  std::shared_ptr<const DescriptorStore> store_;
};

/// Precomputed scores, e.g. exported from an external model.
class TableSimilarity final : public SimilarityBackend {
 public:
  TableSimilarity(ScoreTable table, MissingEntryPolicy missing);

  double similarity(std::string_view query, std::string_view candidate) const override;
  std::string describe() const override;

 private:
  ScoreTable table_;
  MissingEntryPolicy missing_;
};

/// Noise applied to the oracle's 0/1 base score: flip with probability
/// `flip_probability`, add N(0, jitter_sigma^2), clamp to [0, 1]. All draws
/// come from a generator seeded by (seed, unordered pair), so a pair always
/// gets the same score and the flipped set grows monotonically with
/// `flip_probability` for a fixed seed.
struct SimilarityNoise {
  double flip_probability = 0.0;
  double jitter_sigma = 0.0;
  std::uint64_t seed = 0;
};

class OracleSimilarity final : public SimilarityBackend {
 public:
  OracleSimilarity(std::shared_ptr<const PlaceMap> places, SimilarityNoise noise);

  double similarity(std::string_view query, std::string_view candidate) const override;
  std::string describe() const override;

 private:
  std::shared_ptr<const PlaceMap> places_;
  SimilarityNoise noise_;
};

}  // namespace topomap
