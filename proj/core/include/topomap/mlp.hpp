#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace topomap {

enum class Activation { kRelu, kNone };

const char* to_string(Activation activation);

/// Affine layer y = act(W x + b) with W stored row-major (rows = out, cols = in).
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kRelu;
};

/// Classifier head applied to the difference of two global descriptors.
/// Layer widths come from the weights file; only the chaining is enforced:
/// first cols == input_dim, each cols == previous rows, last rows == 2.
struct MlpWeights {
  std::size_t input_dim = 0;
  std::size_t positive_class_index = 0;  // which logit means "same place"
  std::vector<DenseLayer> layers;

  /// Throws Error{kFormat} naming the offending layer (pair).
  void validate() const;
};

using Logits = std::array<double, 2>;

/// g = query - candidate, componentwise. Throws on dimension mismatch.
std::vector<double> descriptor_diff(std::span<const double> query, std::span<const double> candidate);
std::vector<double> descriptor_diff(std::span<const float> query, std::span<const float> candidate);

/// Runs the affine/activation chain and returns the two pre-softmax values.
/// Throws Error{kPipeline} on input dimension mismatch or a non-finite
/// intermediate (message carries the layer index).
Logits mlp_forward(const MlpWeights& weights, std::span<const double> input);

/// Probability of class `positive_index` under a two-way softmax, computed
/// with max subtraction so that |logits| ~ 1e3 does not overflow.
double softmax_sim(const Logits& logits, std::size_t positive_index = 0);

inline constexpr const char* kWeightsFormat = "topomap-mlp";
inline constexpr int kWeightsFormatVersion = 1;

MlpWeights weights_from_json(const nlohmann::json& doc);
nlohmann::json weights_to_json(const MlpWeights& weights);
MlpWeights load_weights(const std::filesystem::path& path);
void write_weights(const std::filesystem::path& path, const MlpWeights& weights);

}  // namespace topomap
