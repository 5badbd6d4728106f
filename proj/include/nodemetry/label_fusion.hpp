#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nodemetry/volume.hpp"

namespace nodemetry {

using ClassId = std::uint8_t;

inline constexpr ClassId kBackgroundClass = 0;
inline constexpr ClassId kLymphNodeClass = 2;
/// Reserved key in a fusion map naming the lymph-node target class.
inline constexpr std::string_view kLymphNodeKey = "lymph_nodes";

/// Source structure -> training class mapping plus overwrite order.
struct FusionSpec {
  std::map<std::string, ClassId, std::less<>> group_map;
  /// Later entries overwrite earlier ones where sources overlap.
  std::vector<ClassId> precedence;
  int class_count = 0;
  ClassId lymph_node_class = kLymphNodeClass;

  /// Position of `id` in `precedence` (higher wins).
  int rank(ClassId id) const;
  ClassId target(std::string_view structure) const;
};

/// Parses the `name = id` / `[precedence]` text format and validates it.
FusionSpec parse_fusion_spec(std::string_view text);
FusionSpec default_fusion_spec();
std::string_view default_fusion_spec_text();

/// Throws ValidationError unless the spec is internally consistent.
void validate_fusion_spec(const FusionSpec& spec);

struct StructureMask {
  std::string name;
  MaskVolume mask;
};

/// Paints each source with its target class in precedence order; lymph
/// nodes are painted last. `threads` splits the grid into slabs.
LabelVolume fuse(std::span<const StructureMask> anatomy, const MaskVolume& ln_mask,
                 const FusionSpec& spec, int threads = 1);

/// Binary mask of voxels labeled `id`.
MaskVolume extract_class(const LabelVolume& labels, ClassId id);

}  // namespace nodemetry
