#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace topomap {

/// A distinctive image retained inside a submap. Its global descriptor lives
/// in a DescriptorStore and is looked up by `id`.
struct Keyframe {
  std::string id;
  double timestamp = 0.0;  // seconds, non-decreasing within a submap
};

/// Small metric reconstruction produced upstream; the atomic unit of every
/// localization decision. Keyframes are in capture order.
struct Submap {
  std::string id;
  std::vector<Keyframe> keyframes;
  std::size_t order_index = 0;
};

}  // namespace topomap
