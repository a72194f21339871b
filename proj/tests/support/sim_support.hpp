#pragma once

#include <memory>
#include <string>
#include <vector>

#include "topomap/evaluation.hpp"
#include "topomap/simulator.hpp"

namespace topomap::testing {

/// Oracle backends exactly as the CLI would build them for a world.
struct WorldBackends {
  std::shared_ptr<const PlaceMap> places;
  std::unique_ptr<OracleSimilarity> similarity;
  std::unique_ptr<OracleMatcher> matcher;

  explicit WorldBackends(const sim::World& world)
      : places(std::make_shared<const PlaceMap>(world.ground_truth.place_map(world.session))),
        similarity(std::make_unique<OracleSimilarity>(places, world.similarity_oracle.noise)),
        matcher(std::make_unique<OracleMatcher>(places, world.matcher_oracle.same_place,
                                                world.matcher_oracle.different_place, world.matcher_oracle.seed)) {}

  Backends view() const { return {similarity.get(), matcher.get()}; }
};

/// First index where the pipeline log departs from the expected log, or
/// the common length when they agree.
inline std::size_t first_mismatch(const std::vector<LocalizationDecision>& got,
                                  const std::vector<sim::ExpectedDecision>& want) {
  const std::size_t n = std::min(got.size(), want.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = got[i];
    const auto& w = want[i];
    if (g.submap_id != w.submap_id || g.merged() != w.merged || g.node.value != w.node || g.trigger != w.trigger) {
      return i;
    }
  }
  return n;
}

inline bool logs_equal(const std::vector<LocalizationDecision>& got, const std::vector<sim::ExpectedDecision>& want) {
  return got.size() == want.size() && first_mismatch(got, want) == got.size();
}

}  // namespace topomap::testing
