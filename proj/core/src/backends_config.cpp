#include "topomap/backends_config.hpp"

#include <set>

#include "topomap/descriptors.hpp"
#include "topomap/error.hpp"
#include "topomap/ground_truth.hpp"
#include "topomap/json_util.hpp"
#include "topomap/mlp.hpp"
#include "topomap/session.hpp"

namespace topomap {

using nlohmann::json;

namespace {

constexpr const char* kCode = "config.format";

[[noreturn]] void bad_config(const std::string& code, const std::string& message) {
  fail(ErrorCategory::kConfig, code, message);
}

// Re-tags format errors raised by json_util accessors as config errors.
template <typename Fn>
auto as_config(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kFormat) throw Error(ErrorCategory::kConfig, e.code(), e.what());
    throw;
  }
}

MissingEntryPolicy parse_missing(const json& doc, const std::string& where) {
  if (!doc.contains("missing")) return MissingEntryPolicy::error();
  const std::string kind = json_util::get_string(doc, "missing", where, kCode);
  if (kind == "error") return MissingEntryPolicy::error();
  if (kind == "default") {
    const double v = doc.contains("default") ? json_util::get_number(doc, "default", where, kCode) : 0.0;
    return MissingEntryPolicy::fallback(v);
  }
  bad_config("config.missing", where + ".missing: expected \"error\" or \"default\"");
}

void put_missing(json& doc, const MissingEntryPolicy& missing) {
  if (missing.kind == MissingEntryPolicy::Kind::kError) {
    doc["missing"] = "error";
  } else {
    doc["missing"] = "default";
    doc["default"] = missing.default_value;
  }
}

std::uint64_t parse_seed(const json& doc, const std::string& where) {
  if (!doc.contains("seed")) return 0;
  const json& v = doc.at("seed");
  if (!v.is_number_unsigned()) bad_config(kCode, where + ".seed: expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::filesystem::path resolve(const std::filesystem::path& workdir, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : workdir / path;
}

}  // namespace

json SimilaritySpec::to_json() const {
  json doc;
  switch (type) {
    case Type::kMlp:
      doc = {{"type", "mlp"}, {"weights", weights}, {"descriptors", descriptors}};
      if (!index.empty()) doc["index"] = index;
      break;
    case Type::kTable:
      doc = {{"type", "table"}, {"path", path}};
      put_missing(doc, missing);
      break;
    case Type::kOracle:
      doc = {{"type", "oracle"}, {"seed", noise.seed}, {"p_flip", noise.flip_probability}, {"sigma", noise.jitter_sigma}};
      break;
  }
  return doc;
}

SimilaritySpec SimilaritySpec::from_json(const json& doc, const std::string& where) {
  return as_config([&] {
    using namespace json_util;
    SimilaritySpec spec;
    const std::string type = get_string(doc, "type", where, kCode);
    if (type == "mlp") {
      spec.type = Type::kMlp;
      spec.weights = get_string(doc, "weights", where, kCode);
      spec.descriptors = get_string(doc, "descriptors", where, kCode);
      if (doc.contains("index")) spec.index = get_string(doc, "index", where, kCode);
    } else if (type == "table") {
      spec.type = Type::kTable;
      spec.path = get_string(doc, "path", where, kCode);
      spec.missing = parse_missing(doc, where);
    } else if (type == "oracle") {
      spec.type = Type::kOracle;
      spec.noise.seed = parse_seed(doc, where);
      if (doc.contains("p_flip")) spec.noise.flip_probability = get_number(doc, "p_flip", where, kCode);
      if (doc.contains("sigma")) spec.noise.jitter_sigma = get_number(doc, "sigma", where, kCode);
    } else {
      bad_config("config.unknown_backend", where + ".type: unknown similarity backend '" + type + "'");
    }
    return spec;
  });
}

json MatcherSpec::to_json() const {
  json doc;
  if (type == Type::kTable) {
    doc = {{"type", "table"}, {"path", path}};
    put_missing(doc, missing);
  } else {
    doc = {{"type", "oracle"}, {"seed", seed}, {"same", same_place.to_json()}, {"different", different_place.to_json()}};
  }
  return doc;
}

MatcherSpec MatcherSpec::from_json(const json& doc, const std::string& where) {
  return as_config([&] {
    using namespace json_util;
    MatcherSpec spec;
    const std::string type = get_string(doc, "type", where, kCode);
    if (type == "table") {
      spec.type = Type::kTable;
      spec.path = get_string(doc, "path", where, kCode);
      spec.missing = parse_missing(doc, where);
    } else if (type == "oracle") {
      spec.type = Type::kOracle;
      spec.seed = parse_seed(doc, where);
      if (doc.contains("same")) spec.same_place = CountDistribution::from_json(doc.at("same"), where + ".same");
      if (doc.contains("different")) {
        spec.different_place = CountDistribution::from_json(doc.at("different"), where + ".different");
      }
    } else {
      bad_config("config.unknown_backend", where + ".type: unknown matcher backend '" + type + "'");
    }
    return spec;
  });
}

json PipelineConfig::to_json() const {
  json doc;
  if (!session.empty()) doc["session"] = session;
  if (!ground_truth.empty()) doc["ground_truth"] = ground_truth;
  doc["slam"] = slam.to_json();
  if (similarity) doc["similarity"] = similarity->to_json();
  if (matcher) doc["matcher"] = matcher->to_json();
  if (!variants.empty()) {
    json jv = json::array();
    for (const auto& v : variants) jv.push_back({{"name", v.name}, {"slam", v.config.to_json()}});
    doc["variants"] = std::move(jv);
  }
  return doc;
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  return as_config([&] {
    using namespace json_util;
    if (!doc.is_object()) bad_config(kCode, "config: expected an object");
    static const std::set<std::string> kKnown{"session", "ground_truth", "slam", "similarity", "matcher", "variants"};
    for (const auto& [key, _] : doc.items()) {
      if (!kKnown.contains(key)) bad_config(kCode, "config." + key + ": unknown section");
    }
    PipelineConfig cfg;
    if (doc.contains("session")) cfg.session = get_string(doc, "session", "config", kCode);
    if (doc.contains("ground_truth")) cfg.ground_truth = get_string(doc, "ground_truth", "config", kCode);
    if (doc.contains("slam")) cfg.slam.apply_json(doc.at("slam"), "config.slam");
    if (doc.contains("similarity") && !doc.at("similarity").is_null()) {
      cfg.similarity = SimilaritySpec::from_json(doc.at("similarity"), "config.similarity");
    }
    if (doc.contains("matcher") && !doc.at("matcher").is_null()) {
      cfg.matcher = MatcherSpec::from_json(doc.at("matcher"), "config.matcher");
    }
    if (doc.contains("variants")) {
      const json& jv = get_array(doc, "variants", "config", kCode);
      for (std::size_t i = 0; i < jv.size(); ++i) {
        const std::string where = "config.variants[" + std::to_string(i) + "]";
        Variant v{get_string(jv[i], "name", where, kCode), cfg.slam};
        if (jv[i].contains("slam")) v.config.apply_json(jv[i].at("slam"), where + ".slam");
        cfg.variants.push_back(std::move(v));
      }
    }
    return cfg;
  });
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const json doc = json_util::read(path, "config.parse");
  try {
    return from_json(doc);
  } catch (const Error& e) {
    throw Error(e.category(), e.code(), path.string() + ": " + e.what());
  }
}

LoadedBackends load_backends(const PipelineConfig& config, const SessionManifest& session, const GroundTruth* gt,
                             const std::filesystem::path& workdir) {
  LoadedBackends out;
  std::shared_ptr<const PlaceMap> places;
  auto oracle_places = [&](const char* which) {
    if (!gt) {
      bad_config("config.oracle_needs_gt",
                 std::string("oracle ") + which + " backend requires a ground-truth file (place map)");
    }
    if (!places) places = std::make_shared<const PlaceMap>(gt->place_map(session));
    return places;
  };

  if (config.slam.retrieval_enabled && !config.similarity) {
    bad_config("config.similarity", "retrieval is enabled but no similarity backend is configured");
  }
  if (config.slam.matcher_enabled && !config.matcher) {
    bad_config("config.matcher", "matcher is enabled but no match backend is configured");
  }

  if (config.similarity) {
    const SimilaritySpec& s = *config.similarity;
    switch (s.type) {
      case SimilaritySpec::Type::kMlp: {
        const auto descriptors = resolve(workdir, s.descriptors);
        const auto index = s.index.empty() ? default_index_path(descriptors) : resolve(workdir, s.index);
        MlpWeights weights = load_weights(resolve(workdir, s.weights));
        auto store = std::make_shared<const DescriptorStore>(load_descriptors(descriptors, index, session));
        out.similarity = std::make_unique<MlpSimilarity>(std::move(weights), std::move(store));
        break;
      }
      case SimilaritySpec::Type::kTable: {
        const auto path = resolve(workdir, s.path);
        ScoreTable table = ScoreTable::load(path);
        table.check_ids(session, path.string());
        out.similarity = std::make_unique<TableSimilarity>(std::move(table), s.missing);
        break;
      }
      case SimilaritySpec::Type::kOracle:
        out.similarity = std::make_unique<OracleSimilarity>(oracle_places("similarity"), s.noise);
        break;
    }
  }

  if (config.matcher) {
    const MatcherSpec& m = *config.matcher;
    if (m.type == MatcherSpec::Type::kTable) {
      const auto path = resolve(workdir, m.path);
      CountTable table = CountTable::load(path);
      table.check_ids(session, path.string());
      out.matcher = std::make_unique<TableMatcher>(std::move(table), m.missing);
    } else {
      out.matcher = std::make_unique<OracleMatcher>(oracle_places("matcher"), m.same_place, m.different_place, m.seed);
    }
  }
  return out;
}

}  // namespace topomap
