#include "topomap/similarity.hpp"

#include <algorithm>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/pair_random.hpp"

namespace topomap {

int PlaceMap::place_of(std::string_view keyframe_id) const {
  auto it = places_.find(std::string(keyframe_id));
  if (it == places_.end()) {
    fail(ErrorCategory::kPipeline, "oracle.unknown_id", "oracle has no place for keyframe '" + std::string(keyframe_id) + "'");
  }
  return it->second;
}

MlpSimilarity::MlpSimilarity(MlpWeights weights, std::shared_ptr<const DescriptorStore> store)
    : weights_(std::move(weights)), store_(std::move(store)) {
  weights_.validate();
  if (!store_) fail(ErrorCategory::kConfig, "config.similarity", "mlp similarity needs a descriptor store");
  if (weights_.input_dim != store_->dim()) {
    fail(ErrorCategory::kConfig, "config.dim_mismatch",
         "mlp input_dim " + std::to_string(weights_.input_dim) + " does not match descriptor dim " +
             std::to_string(store_->dim()));
  }
}

double MlpSimilarity::similarity(std::string_view query, std::string_view candidate) const {
  const std::vector<double> g = descriptor_diff(store_->at(query), store_->at(candidate));
  return softmax_sim(mlp_forward(weights_, g), weights_.positive_class_index);
}

std::string MlpSimilarity::describe() const {
  std::ostringstream out;
  out << "mlp(" << weights_.layers.size() << " layers, D=" << weights_.input_dim << ")";
  return out.str();
}

TableSimilarity::TableSimilarity(ScoreTable table, MissingEntryPolicy missing)
    : table_(std::move(table)), missing_(missing) {
  if (missing_.kind == MissingEntryPolicy::Kind::kDefault &&
      !(missing_.default_value >= 0.0 && missing_.default_value <= 1.0)) {
    fail(ErrorCategory::kConfig, "config.missing_default", "default score must lie in [0,1]");
  }
}

double TableSimilarity::similarity(std::string_view query, std::string_view candidate) const {
  if (auto score = table_.find(query, candidate)) return *score;
  if (missing_.kind == MissingEntryPolicy::Kind::kDefault) return missing_.default_value;
  fail(ErrorCategory::kPipeline, "scores.missing",
       "score table has no entry for (" + std::string(query) + "," + std::string(candidate) + ")");
}

std::string TableSimilarity::describe() const {
  return "table(" + std::to_string(table_.size()) + " scores, " + (table_.symmetric() ? "symmetric" : "asymmetric") + ")";
}

OracleSimilarity::OracleSimilarity(std::shared_ptr<const PlaceMap> places, SimilarityNoise noise)
    : places_(std::move(places)), noise_(noise) {
  if (!places_) fail(ErrorCategory::kConfig, "config.oracle", "oracle similarity needs a place map");
  if (!(noise_.flip_probability >= 0.0 && noise_.flip_probability <= 1.0)) {
    fail(ErrorCategory::kConfig, "config.noise", "flip probability must lie in [0,1]");
  }
  if (!(noise_.jitter_sigma >= 0.0)) fail(ErrorCategory::kConfig, "config.noise", "jitter sigma must be non-negative");
}

double OracleSimilarity::similarity(std::string_view query, std::string_view candidate) const {
  const bool same = places_->place_of(query) == places_->place_of(candidate);
  double score = same ? 1.0 : 0.0;
  PairRng rng(unordered_pair_seed(noise_.seed, query, candidate));
  if (rng.uniform() < noise_.flip_probability) score = 1.0 - score;
  if (noise_.jitter_sigma > 0.0) score += noise_.jitter_sigma * rng.normal();
  return std::clamp(score, 0.0, 1.0);
}

std::string OracleSimilarity::describe() const {
  std::ostringstream out;
  out << "oracle(p_flip=" << noise_.flip_probability << ", sigma=" << noise_.jitter_sigma << ", seed=" << noise_.seed << ")";
  return out.str();
}

}  // namespace topomap
