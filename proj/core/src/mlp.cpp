#include "topomap/mlp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"

namespace topomap {

using nlohmann::json;

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

[[noreturn]] void bad_weights(const std::string& code, const std::string& message) {
  fail(ErrorCategory::kFormat, code, "mlp weights: " + message);
}

std::string layer_name(std::size_t i) { return "layer " + std::to_string(i); }

template <typename T>
std::vector<double> diff_impl(std::span<const T> query, std::span<const T> candidate) {
  if (query.size() != candidate.size()) {
    fail(ErrorCategory::kPipeline, "similarity.dim_mismatch",
         "descriptor dimension mismatch: " + std::to_string(query.size()) + " vs " + std::to_string(candidate.size()));
  }
  std::vector<double> g(query.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(query[i]) - static_cast<double>(candidate[i]);
  return g;
}

Activation parse_activation(const std::string& name, const std::string& where) {
  if (name == "relu") return Activation::kRelu;
  if (name == "none") return Activation::kNone;
  bad_weights("weights.activation", where + ": unknown activation '" + name + "'");
}

std::vector<double> number_array(const json& arr, const std::string& where) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) bad_weights("weights.format", where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

const char* to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "none";
}

void MlpWeights::validate() const {
  if (input_dim == 0) bad_weights("weights.input_dim", "input_dim must be positive");
  if (layers.empty()) bad_weights("weights.empty", "at least one layer is required");
  if (positive_class_index > 1) bad_weights("weights.positive_index", "positive_class_index must be 0 or 1");

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.rows == 0 || l.cols == 0) bad_weights("weights.shape", layer_name(i) + ": zero-sized matrix");
    if (l.weights.size() != l.rows * l.cols) {
      bad_weights("weights.shape", layer_name(i) + ": " + std::to_string(l.weights.size()) + " weights for a " +
                                       std::to_string(l.rows) + "x" + std::to_string(l.cols) + " matrix");
    }
    if (l.bias.size() != l.rows) {
      bad_weights("weights.shape", layer_name(i) + ": bias has " + std::to_string(l.bias.size()) + " entries, expected " +
                                       std::to_string(l.rows));
    }
    const bool finite = std::all_of(l.weights.begin(), l.weights.end(), [](double v) { return std::isfinite(v); }) &&
                        std::all_of(l.bias.begin(), l.bias.end(), [](double v) { return std::isfinite(v); });
    if (!finite) bad_weights("weights.nonfinite", layer_name(i) + ": non-finite parameter");

    if (i == 0) {
      if (l.cols != input_dim) {
        bad_weights("weights.input_dim", "layer 0 expects " + std::to_string(l.cols) + " inputs but input_dim is " +
                                             std::to_string(input_dim));
      }
    } else if (l.cols != layers[i - 1].rows) {
      bad_weights("weights.chain", "layers " + std::to_string(i - 1) + " -> " + std::to_string(i) + " do not chain: " +
                                       std::to_string(layers[i - 1].rows) + " outputs feed " + std::to_string(l.cols) +
                                       " inputs");
    }
  }
  if (layers.back().rows != 2) {
    bad_weights("weights.output", "last layer must have 2 outputs, has " + std::to_string(layers.back().rows));
  }
}

std::vector<double> descriptor_diff(std::span<const double> query, std::span<const double> candidate) {
  return diff_impl(query, candidate);
}

std::vector<double> descriptor_diff(std::span<const float> query, std::span<const float> candidate) {
  return diff_impl(query, candidate);
}

Logits mlp_forward(const MlpWeights& weights, std::span<const double> input) {
  if (input.size() != weights.input_dim) {
    fail(ErrorCategory::kPipeline, "mlp.dim_mismatch",
         "mlp input has dimension " + std::to_string(input.size()) + ", expected " + std::to_string(weights.input_dim));
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t i = 0; i < weights.layers.size(); ++i) {
    const DenseLayer& l = weights.layers[i];
    if (static_cast<std::size_t>(x.size()) != l.cols) {
      fail(ErrorCategory::kPipeline, "mlp.dim_mismatch", layer_name(i) + ": input dimension does not chain");
    }
    const auto rows = static_cast<Eigen::Index>(l.rows);
    const auto cols = static_cast<Eigen::Index>(l.cols);
    Eigen::Map<const RowMajorMatrix> w(l.weights.data(), rows, cols);
    Eigen::Map<const Eigen::VectorXd> b(l.bias.data(), rows);
    Eigen::VectorXd y = w * x + b;
    if (l.activation == Activation::kRelu) y = y.cwiseMax(0.0);
    if (!y.allFinite()) {
      fail(ErrorCategory::kPipeline, "mlp.nonfinite", layer_name(i) + ": non-finite activation");
    }
    x = std::move(y);
  }
  if (x.size() != 2) fail(ErrorCategory::kPipeline, "mlp.output", "mlp produced " + std::to_string(x.size()) + " logits");
  return {x[0], x[1]};
}

double softmax_sim(const Logits& logits, std::size_t positive_index) {
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
    fail(ErrorCategory::kPipeline, "mlp.nonfinite", "softmax input is not finite");
  }
  if (positive_index > 1) fail(ErrorCategory::kPipeline, "mlp.positive_index", "positive index must be 0 or 1");
  const double top = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - top);
  const double e1 = std::exp(logits[1] - top);
  return (positive_index == 0 ? e0 : e1) / (e0 + e1);
}

MlpWeights weights_from_json(const json& doc) {
  using namespace json_util;
  constexpr const char* kCode = "weights.format";
  if (get_string(doc, "format", "weights", kCode) != kWeightsFormat) {
    bad_weights(kCode, "unexpected 'format' value");
  }
  if (get_integer(doc, "format_version", "weights", kCode) != kWeightsFormatVersion) {
    bad_weights("weights.version", "unsupported format_version");
  }
  MlpWeights w;
  const std::int64_t input_dim = get_integer(doc, "input_dim", "weights", kCode);
  const std::int64_t positive = get_integer(doc, "positive_class_index", "weights", kCode);
  if (input_dim <= 0) bad_weights("weights.input_dim", "input_dim must be positive");
  if (positive < 0 || positive > 1) bad_weights("weights.positive_index", "positive_class_index must be 0 or 1");
  w.input_dim = static_cast<std::size_t>(input_dim);
  w.positive_class_index = static_cast<std::size_t>(positive);

  const json& jlayers = get_array(doc, "layers", "weights", kCode);
  for (std::size_t i = 0; i < jlayers.size(); ++i) {
    const std::string where = "weights.layers[" + std::to_string(i) + "]";
    DenseLayer l;
    const std::int64_t rows = get_integer(jlayers[i], "rows", where, kCode);
    const std::int64_t cols = get_integer(jlayers[i], "cols", where, kCode);
    if (rows <= 0 || cols <= 0) bad_weights("weights.shape", where + ": rows and cols must be positive");
    l.rows = static_cast<std::size_t>(rows);
    l.cols = static_cast<std::size_t>(cols);
    l.weights = number_array(get_array(jlayers[i], "weights", where, kCode), where + ".weights");
    l.bias = number_array(get_array(jlayers[i], "bias", where, kCode), where + ".bias");
    l.activation = parse_activation(get_string(jlayers[i], "activation", where, kCode), where + ".activation");
    w.layers.push_back(std::move(l));
  }
  w.validate();
  return w;
}

json weights_to_json(const MlpWeights& weights) {
  json layers = json::array();
  for (const auto& l : weights.layers) {
    layers.push_back({{"rows", l.rows},
                      {"cols", l.cols},
                      {"weights", l.weights},
                      {"bias", l.bias},
                      {"activation", to_string(l.activation)}});
  }
  json doc;
  doc["format"] = kWeightsFormat;
  doc["format_version"] = kWeightsFormatVersion;
  doc["input_dim"] = weights.input_dim;
  doc["positive_class_index"] = weights.positive_class_index;
  doc["layers"] = std::move(layers);
  return doc;
}

MlpWeights load_weights(const std::filesystem::path& path) {
  const json doc = json_util::read(path, "weights.parse");
  try {
    return weights_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.category(), e.code(), path.string() + ": " + e.what());
  }
}

void write_weights(const std::filesystem::path& path, const MlpWeights& weights) {
  json_util::write_text(path, weights_to_json(weights).dump() + "\n");
}

}  // namespace topomap
