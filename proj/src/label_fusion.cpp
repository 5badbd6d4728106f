#include "nodemetry/label_fusion.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "nodemetry/default_fusion_map.hpp"
#include "nodemetry/parallel.hpp"

namespace nodemetry {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_class_id(std::string_view token, int line_number) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ValidationError("fusion spec line " + std::to_string(line_number) +
                          ": invalid class id '" + std::string(token) + "'");
  }
  if (value <= 0) {
    throw ValidationError("fusion spec line " + std::to_string(line_number) +
                          ": class id " + std::to_string(value) + " is reserved for background");
  }
  if (value > 255) {
    throw ValidationError("fusion spec line " + std::to_string(line_number) + ": class id " +
                          std::to_string(value) + " exceeds 255");
  }
  return value;
}

}  // namespace

int FusionSpec::rank(ClassId id) const {
  const auto it = std::find(precedence.begin(), precedence.end(), id);
  if (it == precedence.end()) throw MappingError("class " + std::to_string(id) + " has no precedence");
  return static_cast<int>(it - precedence.begin());
}

ClassId FusionSpec::target(std::string_view structure) const {
  const auto it = group_map.find(structure);
  if (it == group_map.end()) {
    throw MappingError("structure '" + std::string(structure) + "' is not in the fusion spec");
  }
  return it->second;
}

FusionSpec parse_fusion_spec(std::string_view text) {
  FusionSpec spec;
  bool in_precedence = false;
  bool saw_precedence = false;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line != "[precedence]") {
        throw ValidationError("fusion spec line " + std::to_string(line_number) +
                              ": unknown section " + std::string(line));
      }
      in_precedence = true;
      saw_precedence = true;
      continue;
    }

    if (in_precedence) {
      std::string tokens(line);
      std::replace(tokens.begin(), tokens.end(), ',', ' ');
      std::istringstream in(tokens);
      std::string token;
      while (in >> token) spec.precedence.push_back(static_cast<ClassId>(parse_class_id(token, line_number)));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("fusion spec line " + std::to_string(line_number) +
                            ": expected 'structure = class_id'");
    }
    const std::string name(trim(line.substr(0, eq)));
    const auto id_text = trim(line.substr(eq + 1));
    if (name.empty()) {
      throw ValidationError("fusion spec line " + std::to_string(line_number) + ": empty structure name");
    }
    const int id = parse_class_id(id_text, line_number);
    if (!spec.group_map.emplace(name, static_cast<ClassId>(id)).second) {
      throw ValidationError("fusion spec line " + std::to_string(line_number) +
                            ": duplicate structure name '" + name + "'");
    }
  }

  if (const auto ln = spec.group_map.find(kLymphNodeKey); ln != spec.group_map.end()) {
    spec.lymph_node_class = ln->second;
  }
  std::set<ClassId> targets;
  for (const auto& [name, id] : spec.group_map) targets.insert(id);
  spec.class_count = targets.empty() ? 0 : *targets.rbegin();

  if (!saw_precedence) {
    // Ascending ids, lymph nodes on top.
    for (const ClassId id : targets) {
      if (id != spec.lymph_node_class) spec.precedence.push_back(id);
    }
    if (targets.contains(spec.lymph_node_class)) spec.precedence.push_back(spec.lymph_node_class);
  }
  validate_fusion_spec(spec);
  return spec;
}

void validate_fusion_spec(const FusionSpec& spec) {
  std::set<ClassId> targets;
  for (const auto& [name, id] : spec.group_map) {
    if (id == kBackgroundClass) {
      throw ValidationError("structure '" + name + "' maps to background class 0");
    }
    targets.insert(id);
  }
  if (targets.empty()) throw ValidationError("fusion spec maps no structures");

  const int max_id = *targets.rbegin();
  std::vector<int> missing;
  for (int id = 1; id <= max_id; ++id) {
    if (!targets.contains(static_cast<ClassId>(id))) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const int id : missing) list += (list.empty() ? "" : ", ") + std::to_string(id);
    throw ValidationError("fusion spec class ids are not dense: missing id(s) " + list);
  }
  if (spec.class_count != max_id) {
    throw ValidationError("class_count " + std::to_string(spec.class_count) +
                          " does not match the largest target id " + std::to_string(max_id));
  }
  if (!spec.group_map.contains(kLymphNodeKey)) {
    throw ValidationError("fusion spec has no '" + std::string(kLymphNodeKey) + "' class");
  }
  if (spec.group_map.find(kLymphNodeKey)->second != spec.lymph_node_class) {
    throw ValidationError("lymph-node class disagrees with the '" + std::string(kLymphNodeKey) + "' entry");
  }

  std::set<ClassId> seen;
  for (const ClassId id : spec.precedence) {
    if (!targets.contains(id)) {
      throw ValidationError("precedence lists class " + std::to_string(id) + " that no structure maps to");
    }
    if (!seen.insert(id).second) {
      throw ValidationError("precedence lists class " + std::to_string(id) + " more than once");
    }
  }
  for (const ClassId id : targets) {
    if (!seen.contains(id)) {
      throw ValidationError("class " + std::to_string(id) + " is missing from the precedence list");
    }
  }
  if (spec.precedence.back() != spec.lymph_node_class) {
    throw ValidationError("lymph-node class " + std::to_string(spec.lymph_node_class) +
                          " must be last in the precedence list");
  }
}

std::string_view default_fusion_spec_text() { return detail::kDefaultFusionMap; }

FusionSpec default_fusion_spec() { return parse_fusion_spec(default_fusion_spec_text()); }

LabelVolume fuse(std::span<const StructureMask> anatomy, const MaskVolume& ln_mask,
                 const FusionSpec& spec, int threads) {
  struct Layer {
    const MaskVolume* mask;
    ClassId id;
    int rank;
  };
  std::vector<Layer> layers;
  layers.reserve(anatomy.size() + 1);
  for (const auto& source : anatomy) {
    const ClassId id = spec.target(source.name);
    assert_same_grid(ln_mask.grid(), source.mask.grid());
    layers.push_back({&source.mask, id, spec.rank(id)});
  }
  std::stable_sort(layers.begin(), layers.end(),
                   [](const Layer& a, const Layer& b) { return a.rank < b.rank; });
  layers.push_back({&ln_mask, spec.lymph_node_class, spec.rank(spec.lymph_node_class)});

  LabelVolume out(ln_mask.grid(), kBackgroundClass);
  auto dst = out.data();
  const std::int64_t stride = ln_mask.grid().slice_stride();
  parallel_for(ln_mask.dims()[2], threads, [&](std::int64_t k0, std::int64_t k1) {
    const auto begin = static_cast<std::size_t>(k0 * stride);
    const auto end = static_cast<std::size_t>(k1 * stride);
    for (const Layer& layer : layers) {
      const auto src = layer.mask->data();
      for (std::size_t v = begin; v < end; ++v) {
        if (src[v] != 0) dst[v] = layer.id;
      }
    }
  });
  return out;
}

MaskVolume extract_class(const LabelVolume& labels, ClassId id) {
  MaskVolume out(labels.grid());
  const auto src = labels.data();
  auto dst = out.data();
  for (std::size_t v = 0; v < src.size(); ++v) dst[v] = src[v] == id ? 1 : 0;
  return out;
}

}  // namespace nodemetry
