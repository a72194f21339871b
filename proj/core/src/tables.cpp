#include "topomap/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/session.hpp"

namespace topomap {

namespace {

constexpr char kSep = '\x1f';

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string unordered_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string k(a);
  k += kSep;
  k += b;
  return k;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Record {
  std::size_t lineno;
  std::string a;
  std::string b;
  std::string_view value;
};

// Iterates `id_a,id_b,value` lines; '#' lines other than the header are comments.
template <typename Fn>
void for_each_record(const std::string& text, const std::string& source, const std::string& prefix, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_fields(body);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      fail(ErrorCategory::kFormat, prefix + ".record",
           source + ":" + std::to_string(lineno) + ": expected 'id_a,id_b,value', got '" + std::string(body) + "'");
    }
    fn(Record{lineno, std::string(fields[0]), std::string(fields[1]), fields[2]});
  }
}

std::string where(const std::string& source, std::size_t lineno) { return source + ":" + std::to_string(lineno); }

}  // namespace

// --- ScoreTable -------------------------------------------------------------

std::string ScoreTable::key(std::string_view a, std::string_view b) const {
  if (symmetric_) return unordered_key(a, b);
  std::string k(a);
  k += kSep;
  k += b;
  return k;
}

void ScoreTable::insert(const std::string& a, const std::string& b, double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    fail(ErrorCategory::kFormat, "scores.value", "score for (" + a + "," + b + ") must lie in [0,1]");
  }
  auto [it, inserted] = records_.emplace(key(a, b), score);
  if (!inserted && it->second != score) {
    fail(ErrorCategory::kFormat, "scores.duplicate", "conflicting scores for pair (" + a + "," + b + ")");
  }
  if (inserted) {
    if (symmetric_ && b < a) {
      pairs_.emplace_back(b, a);
    } else {
      pairs_.emplace_back(a, b);
    }
  }
}

std::optional<double> ScoreTable::find(std::string_view query, std::string_view candidate) const {
  auto it = records_.find(key(query, candidate));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void ScoreTable::check_ids(const SessionManifest& manifest, const std::string& source) const {
  for (const auto& [a, b] : pairs_) {
    for (const auto* id : {&a, &b}) {
      if (!manifest.has_keyframe(*id)) {
        fail(ErrorCategory::kFormat, "scores.unknown_id", source + ": keyframe '" + *id + "' is not in the manifest");
      }
    }
  }
}

std::string ScoreTable::to_text() const {
  auto sorted = pairs_;
  std::sort(sorted.begin(), sorted.end());
  std::string out = std::string("#symmetric=") + (symmetric_ ? "true" : "false") + "\n";
  for (const auto& [a, b] : sorted) {
    out += a + "," + b + "," + format_double(records_.at(key(a, b))) + "\n";
  }
  return out;
}

ScoreTable ScoreTable::parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string header;
  std::size_t lineno = 0;
  while (std::getline(in, header)) {
    ++lineno;
    if (!trim(header).empty()) break;
  }
  const std::string_view h = trim(header);
  bool symmetric = true;
  if (h == "#symmetric=true") {
    symmetric = true;
  } else if (h == "#symmetric=false") {
    symmetric = false;
  } else {
    fail(ErrorCategory::kFormat, "scores.header",
         where(source, std::max<std::size_t>(lineno, 1)) + ": score table must start with '#symmetric=<true|false>'");
  }

  ScoreTable table(symmetric);
  for_each_record(text, source, "scores", [&](const Record& r) {
    double score = 0.0;
    const auto* end = r.value.data() + r.value.size();
    auto res = std::from_chars(r.value.data(), end, score);
    if (res.ec != std::errc{} || res.ptr != end) {
      fail(ErrorCategory::kFormat, "scores.value", where(source, r.lineno) + ": score '" + std::string(r.value) + "' is not a number");
    }
    try {
      table.insert(r.a, r.b, score);
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), where(source, r.lineno) + ": " + e.what());
    }
  });
  return table;
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  return parse(json_util::read_text(path), path.string());
}

// --- CountTable -------------------------------------------------------------

void CountTable::insert(const std::string& a, const std::string& b, std::uint32_t count) {
  auto [it, inserted] = records_.emplace(unordered_key(a, b), count);
  if (!inserted && it->second != count) {
    fail(ErrorCategory::kFormat, "counts.duplicate", "conflicting match counts for pair (" + a + "," + b + ")");
  }
  if (inserted) pairs_.emplace_back(std::min(a, b), std::max(a, b));
}

std::optional<std::uint32_t> CountTable::find(std::string_view a, std::string_view b) const {
  auto it = records_.find(unordered_key(a, b));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void CountTable::check_ids(const SessionManifest& manifest, const std::string& source) const {
  for (const auto& [a, b] : pairs_) {
    for (const auto* id : {&a, &b}) {
      if (!manifest.has_keyframe(*id)) {
        fail(ErrorCategory::kFormat, "counts.unknown_id", source + ": keyframe '" + *id + "' is not in the manifest");
      }
    }
  }
}

std::string CountTable::to_text() const {
  auto sorted = pairs_;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& [a, b] : sorted) out += a + "," + b + "," + std::to_string(records_.at(unordered_key(a, b))) + "\n";
  return out;
}

CountTable CountTable::parse(const std::string& text, const std::string& source) {
  CountTable table;
  for_each_record(text, source, "counts", [&](const Record& r) {
    std::uint64_t count = 0;
    const auto* end = r.value.data() + r.value.size();
    auto res = std::from_chars(r.value.data(), end, count);
    if (res.ec != std::errc{} || res.ptr != end || count > std::numeric_limits<std::uint32_t>::max()) {
      fail(ErrorCategory::kFormat, "counts.value",
           where(source, r.lineno) + ": match count '" + std::string(r.value) + "' is not a non-negative integer");
    }
    try {
      table.insert(r.a, r.b, static_cast<std::uint32_t>(count));
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), where(source, r.lineno) + ": " + e.what());
    }
  });
  return table;
}

CountTable CountTable::load(const std::filesystem::path& path) {
  return parse(json_util::read_text(path), path.string());
}

}  // namespace topomap
