#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace topomap {

class SessionManifest;

/// What a table-backed backend does for a pair it has no record for.
struct MissingEntryPolicy {
  enum class Kind { kError, kDefault };
  Kind kind = Kind::kError;
  double default_value = 0.0;

  static MissingEntryPolicy error() { return {Kind::kError, 0.0}; }
  static MissingEntryPolicy fallback(double value) { return {Kind::kDefault, value}; }
};

/// Pairwise similarity scores, `#symmetric=<bool>` header then
/// `id_a,id_b,score` records. Symmetric tables are keyed by the unordered
/// pair; asymmetric tables by (query, candidate).
class ScoreTable {
 public:
  explicit ScoreTable(bool symmetric = true) : symmetric_(symmetric) {}

  bool symmetric() const { return symmetric_; }
  std::size_t size() const { return records_.size(); }

  /// Inserts a score in [0, 1]; an existing key with a different score is a
  /// conflict and throws Error{kFormat, "scores.duplicate"}.
  void insert(const std::string& a, const std::string& b, double score);
  std::optional<double> find(std::string_view query, std::string_view candidate) const;

  /// Throws Error{kFormat, "scores.unknown_id"} for ids not in the manifest.
  void check_ids(const SessionManifest& manifest, const std::string& source) const;

  /// Records sorted by key, header first.
  std::string to_text() const;
  static ScoreTable parse(const std::string& text, const std::string& source);
  static ScoreTable load(const std::filesystem::path& path);

 private:
  std::string key(std::string_view a, std::string_view b) const;

  bool symmetric_;
  std::unordered_map<std::string, double> records_;
  std::vector<std::pair<std::string, std::string>> pairs_;
};

/// Symmetric match counts: `id_a,id_b,count` records, keys normalized to the
/// unordered pair on load.
class CountTable {
 public:
  std::size_t size() const { return records_.size(); }

  void insert(const std::string& a, const std::string& b, std::uint32_t count);
  std::optional<std::uint32_t> find(std::string_view a, std::string_view b) const;
  void check_ids(const SessionManifest& manifest, const std::string& source) const;

  std::string to_text() const;
  static CountTable parse(const std::string& text, const std::string& source);
  static CountTable load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::uint32_t> records_;
  std::vector<std::pair<std::string, std::string>> pairs_;
};

}  // namespace topomap
