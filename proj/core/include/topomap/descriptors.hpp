#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topomap {

class SessionManifest;

/// Binary descriptor file layout (all little-endian):
///
///   offset  size  field
///   0       4     magic "CSLD"
///   4       4     u32 version (= 1)
///   8       4     u32 count
///   12      4     u32 dim
///   16      4*count*dim  f32 rows, row-major
///
/// The sidecar index is a text file with one keyframe id per line; line i
/// names row i. Trailing bytes after the payload are rejected.
inline constexpr char kDescriptorMagic[4] = {'C', 'S', 'L', 'D'};
inline constexpr std::uint32_t kDescriptorVersion = 1;
inline constexpr std::size_t kDescriptorHeaderBytes = 16;

/// Read-only keyframe id -> global descriptor lookup.
class DescriptorStore {
 public:
  DescriptorStore() = default;
  /// `values` holds ids.size() rows of `dim` floats. Validates finiteness and
  /// id uniqueness.
  DescriptorStore(std::size_t dim, std::vector<std::string> ids, std::vector<float> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& values() const { return values_; }

  bool contains(std::string_view id) const;
  std::span<const float> row(std::size_t index) const;
  /// Throws Error{kPipeline, "descriptors.unknown_id"} naming the id.
  std::span<const float> at(std::string_view id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Default sidecar location: "<descriptor path>.idx".
std::filesystem::path default_index_path(const std::filesystem::path& descriptors);

/// Decodes a descriptor payload and its index text.
DescriptorStore parse_descriptors(std::span<const std::byte> payload, const std::string& index_text,
                                  const std::string& source);

/// Loads and cross-checks against the manifest: dim must equal the declared
/// D and every manifest keyframe must be indexed.
DescriptorStore load_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path,
                                 const SessionManifest& manifest);
DescriptorStore load_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path);

std::vector<std::byte> encode_descriptors(const DescriptorStore& store);
std::string encode_index(const DescriptorStore& store);
void write_descriptors(const std::filesystem::path& path, const std::filesystem::path& index_path,
                       const DescriptorStore& store);

}  // namespace topomap
