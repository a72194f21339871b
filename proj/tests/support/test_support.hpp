#pragma once

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "topomap/error.hpp"
#include "topomap/matching.hpp"
#include "topomap/session.hpp"
#include "topomap/similarity.hpp"

namespace topomap::testing {

inline std::filesystem::path fixture_dir() { return TOPOMAP_FIXTURE_DIR; }

/// Submaps "<id>" holding `n` keyframes "<id>_k<j>".
inline SessionManifest make_session(const std::vector<std::pair<std::string, std::size_t>>& spec,
                                    std::size_t dim = 4) {
  std::vector<Submap> submaps;
  double t = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    Submap s{spec[i].first, {}, i};
    for (std::size_t j = 0; j < spec[i].second; ++j) {
      s.keyframes.push_back({spec[i].first + "_k" + std::to_string(j), t});
      t += 0.5;
    }
    submaps.push_back(std::move(s));
  }
  return SessionManifest("test", dim, std::move(submaps));
}

/// Submap id owning a keyframe id built by make_session.
inline std::string owner(std::string_view keyframe) {
  return std::string(keyframe.substr(0, keyframe.rfind("_k")));
}

class FnSimilarity final : public SimilarityBackend {
 public:
  using Fn = std::function<double(std::string_view, std::string_view)>;
  explicit FnSimilarity(Fn fn) : fn_(std::move(fn)) {}
  double similarity(std::string_view q, std::string_view c) const override {
    ++calls;
    return fn_(q, c);
  }
  std::string describe() const override { return "fn"; }
  mutable std::atomic<std::size_t> calls{0};

 private:
  Fn fn_;
};

class FnMatcher final : public MatchBackend {
 public:
  using Fn = std::function<std::uint32_t(std::string_view, std::string_view)>;
  explicit FnMatcher(Fn fn) : fn_(std::move(fn)) {}
  std::uint32_t match_count(std::string_view a, std::string_view b) const override {
    ++calls;
    return fn_(a, b);
  }
  std::string describe() const override { return "fn"; }
  mutable std::atomic<std::size_t> calls{0};

 private:
  Fn fn_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("topomap-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Runs `fn`, which must throw topomap::Error, and returns the error.
template <typename Fn>
Error capture_error(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected topomap::Error";
  return Error(ErrorCategory::kPipeline, "none", "no error thrown");
}

}  // namespace topomap::testing

#define EXPECT_ERROR_CODE(stmt, expected_code) \
  EXPECT_EQ(::topomap::testing::capture_error([&] { (void)(stmt); }).code(), expected_code)
