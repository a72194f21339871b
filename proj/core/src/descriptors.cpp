#include "topomap/descriptors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "topomap/error.hpp"
#include "topomap/json_util.hpp"
#include "topomap/session.hpp"

namespace topomap {

namespace {

std::uint32_t read_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (std::size_t i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

std::vector<std::string> split_index(const std::string& text, const std::string& source) {
  std::vector<std::string> ids;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      fail(ErrorCategory::kFormat, "descriptors.index",
           source + ":" + std::to_string(lineno) + ": empty keyframe id in descriptor index");
    }
    ids.push_back(line);
  }
  return ids;
}

std::vector<std::byte> read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::kIo, "io.open", "cannot open '" + path.string() + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

}  // namespace

DescriptorStore::DescriptorStore(std::size_t dim, std::vector<std::string> ids, std::vector<float> values)
    : dim_(dim), ids_(std::move(ids)), values_(std::move(values)) {
  if (dim_ == 0) fail(ErrorCategory::kFormat, "descriptors.dim", "descriptor dimension must be positive");
  if (values_.size() != ids_.size() * dim_) {
    fail(ErrorCategory::kFormat, "descriptors.count",
         "descriptor payload holds " + std::to_string(values_.size()) + " values, expected " +
             std::to_string(ids_.size()) + " x " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorCategory::kFormat, "descriptors.nonfinite",
           "descriptor row " + std::to_string(i / dim_) + " ('" + ids_[i / dim_] + "') has a non-finite component at " +
               std::to_string(i % dim_));
    }
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      fail(ErrorCategory::kFormat, "descriptors.duplicate_id", "keyframe id '" + ids_[i] + "' indexed twice");
    }
  }
}

bool DescriptorStore::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::span<const float> DescriptorStore::row(std::size_t index) const {
  return std::span<const float>(values_).subspan(index * dim_, dim_);
}

std::span<const float> DescriptorStore::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    fail(ErrorCategory::kPipeline, "descriptors.unknown_id", "no descriptor for keyframe '" + std::string(id) + "'");
  }
  return row(it->second);
}

std::filesystem::path default_index_path(const std::filesystem::path& descriptors) {
  return descriptors.string() + ".idx";
}

DescriptorStore parse_descriptors(std::span<const std::byte> payload, const std::string& index_text,
                                  const std::string& source) {
  auto bad = [&](const char* code, const std::string& msg) { fail(ErrorCategory::kFormat, code, source + ": " + msg); };

  if (payload.size() < kDescriptorHeaderBytes) {
    bad("descriptors.truncated", "header truncated at byte offset " + std::to_string(payload.size()) + " (need " +
                                     std::to_string(kDescriptorHeaderBytes) + " bytes)");
  }
  if (std::memcmp(payload.data(), kDescriptorMagic, 4) != 0) bad("descriptors.magic", "bad magic, expected \"CSLD\"");
  const std::uint32_t version = read_u32(payload, 4);
  if (version != kDescriptorVersion) bad("descriptors.version", "unsupported version " + std::to_string(version));
  const std::uint64_t count = read_u32(payload, 8);
  const std::uint64_t dim = read_u32(payload, 12);
  if (dim == 0) bad("descriptors.dim", "dim must be positive");

  const std::uint64_t expected = kDescriptorHeaderBytes + count * dim * 4;
  if (payload.size() < expected) {
    const std::uint64_t row_bytes = dim * 4;
    const std::uint64_t full_rows = (payload.size() - kDescriptorHeaderBytes) / row_bytes;
    bad("descriptors.truncated", "payload truncated at byte offset " + std::to_string(payload.size()) + " inside row " +
                                     std::to_string(full_rows) + " (expected " + std::to_string(expected) + " bytes)");
  }
  if (payload.size() > expected) {
    bad("descriptors.trailing", "unexpected trailing bytes at byte offset " + std::to_string(expected));
  }

  std::vector<std::string> ids = split_index(index_text, source + ".idx");
  if (ids.size() != count) {
    bad("descriptors.index", "index lists " + std::to_string(ids.size()) + " ids but the file holds " +
                                 std::to_string(count) + " rows");
  }

  std::vector<float> values(count * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(read_u32(payload, kDescriptorHeaderBytes + 4 * i));
  }
  try {
    return DescriptorStore(dim, std::move(ids), std::move(values));
  } catch (const Error& e) {
    throw Error(e.category(), e.code(), source + ": " + e.what());
  }
}

DescriptorStore load_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path) {
  const std::vector<std::byte> payload = read_binary(path);
  return parse_descriptors(payload, json_util::read_text(index_path), path.string());
}

DescriptorStore load_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path,
                                 const SessionManifest& manifest) {
  DescriptorStore store = load_descriptors(path, index_path);
  if (store.dim() != manifest.descriptor_dim()) {
    fail(ErrorCategory::kFormat, "descriptors.dim_mismatch",
         path.string() + ": descriptor dim " + std::to_string(store.dim()) + " does not match manifest dim " +
             std::to_string(manifest.descriptor_dim()));
  }
  for (const auto& s : manifest.submaps()) {
    for (const auto& kf : s.keyframes) {
      if (!store.contains(kf.id)) {
        fail(ErrorCategory::kFormat, "descriptors.unindexed",
             path.string() + ": manifest keyframe '" + kf.id + "' (submap '" + s.id + "') has no descriptor");
      }
    }
  }
  return store;
}

std::vector<std::byte> encode_descriptors(const DescriptorStore& store) {
  std::vector<std::byte> out;
  out.reserve(kDescriptorHeaderBytes + store.values().size() * 4);
  for (char c : kDescriptorMagic) out.push_back(static_cast<std::byte>(c));
  append_u32(out, kDescriptorVersion);
  append_u32(out, static_cast<std::uint32_t>(store.size()));
  append_u32(out, static_cast<std::uint32_t>(store.dim()));
  for (float v : store.values()) append_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::string encode_index(const DescriptorStore& store) {
  std::string text;
  for (const auto& id : store.ids()) {
    text += id;
    text += '\n';
  }
  return text;
}

void write_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path,
                       const DescriptorStore& store) {
  const std::vector<std::byte> bytes = encode_descriptors(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "io.open", "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCategory::kIo, "io.write", "error while writing '" + path.string() + "'");
  json_util::write_text(index_path, encode_index(store));
}

}  // namespace topomap
