#include "nodemetry/phantom.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "nodemetry/connected_components.hpp"

namespace nodemetry {

namespace {

// Half-extents of the rotated ellipsoid's axis-aligned bounding box.
Eigen::Vector3d half_extents(const PhantomNode& node) {
  const double t = node.rotation_deg * std::numbers::pi / 180.0;
  const double a = node.semiaxes_mm.x(), b = node.semiaxes_mm.y();
  return {std::hypot(a * std::cos(t), b * std::sin(t)), std::hypot(a * std::sin(t), b * std::cos(t)),
          node.semiaxes_mm.z()};
}

void validate_node(const PhantomSpec& spec, const PhantomNode& node, std::size_t index) {
  const std::string name = "phantom node " + std::to_string(index + 1);
  for (int axis = 0; axis < 3; ++axis) {
    if (!(node.semiaxes_mm[axis] > 0.0)) throw ValidationError(name + ": semiaxes must be positive");
  }
  const Eigen::Vector3d extent = half_extents(node);
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = -0.5 * spec.spacing_mm[axis];
    const double hi = (double(spec.dims[axis]) - 0.5) * spec.spacing_mm[axis];
    if (node.center_mm[axis] - extent[axis] < lo || node.center_mm[axis] + extent[axis] > hi) {
      throw ValidationError(name + " exceeds the grid along axis " + std::to_string(axis));
    }
  }
}

}  // namespace

Phantom generate(const PhantomSpec& spec) {
  const Grid grid = Grid::from_spacing(spec.dims, spec.spacing_mm);
  grid.validate();
  if (spec.nodes.size() > 255) throw CapacityError("phantoms hold at most 255 nodes");

  Phantom phantom;
  phantom.instances = LabelVolume(grid, 0);
  auto& labels = phantom.instances;
  std::vector<std::vector<std::int64_t>> node_voxels(spec.nodes.size());

  for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
    const PhantomNode& node = spec.nodes[n];
    validate_node(spec, node, n);
    const Eigen::Vector3d extent = half_extents(node);
    Index3 lo{}, hi{};
    for (int axis = 0; axis < 3; ++axis) {
      lo[axis] = std::max<std::int64_t>(
          0, std::int64_t(std::ceil((node.center_mm[axis] - extent[axis]) / spec.spacing_mm[axis])));
      hi[axis] = std::min<std::int64_t>(
          spec.dims[axis] - 1,
          std::int64_t(std::floor((node.center_mm[axis] + extent[axis]) / spec.spacing_mm[axis])));
    }
    const double t = node.rotation_deg * std::numbers::pi / 180.0;
    const double cos_t = std::cos(t), sin_t = std::sin(t);
    const Eigen::Vector3d inv = node.semiaxes_mm.cwiseInverse();
    const auto label = static_cast<std::uint8_t>(n + 1);
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k) {
      const double dz = double(k) * spec.spacing_mm.z() - node.center_mm.z();
      for (std::int64_t j = lo[1]; j <= hi[1]; ++j) {
        const double dy = double(j) * spec.spacing_mm.y() - node.center_mm.y();
        for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
          const double dx = double(i) * spec.spacing_mm.x() - node.center_mm.x();
          const double u = (cos_t * dx + sin_t * dy) * inv.x();
          const double v = (-sin_t * dx + cos_t * dy) * inv.y();
          const double w = dz * inv.z();
          if (u * u + v * v + w * w > 1.0) continue;
          auto& cell = labels(i, j, k);
          if (cell != 0) {
            throw ValidationError("phantom nodes " + std::to_string(cell) + " and " +
                                  std::to_string(n + 1) + " overlap");
          }
          cell = label;
          node_voxels[n].push_back(grid.linear_index(i, j, k));
        }
      }
    }
    if (node_voxels[n].empty()) {
      throw ValidationError("phantom node " + std::to_string(n + 1) + " contains no voxel center");
    }
  }

  // Distinct nodes must not touch, or they would merge into one component.
  for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
    for (const std::int64_t v : node_voxels[n]) {
      const Index3 idx = grid.unravel(v);
      for (std::int64_t dk = -1; dk <= 1; ++dk) {
        for (std::int64_t dj = -1; dj <= 1; ++dj) {
          for (std::int64_t di = -1; di <= 1; ++di) {
            const Index3 nb{idx[0] + di, idx[1] + dj, idx[2] + dk};
            if (!grid.contains(nb)) continue;
            const std::uint8_t other = labels(nb[0], nb[1], nb[2]);
            if (other != 0 && other != n + 1) {
              throw ValidationError("phantom nodes " + std::to_string(n + 1) + " and " +
                                    std::to_string(other) + " touch");
            }
          }
        }
      }
    }
  }

  for (std::size_t n = 0; n < spec.nodes.size(); ++n) {
    const PhantomNode& node = spec.nodes[n];
    NodeMeasurement m;
    m.component_index = std::int64_t(n + 1);
    m.voxel_count = std::ssize(node_voxels[n]);
    m.volume_mm3 = double(m.voxel_count) * spec.spacing_mm.prod();
    m.sad_mm = 2.0 * std::min(node.semiaxes_mm.x(), node.semiaxes_mm.y());
    m.long_axis_mm = 2.0 * std::max(node.semiaxes_mm.x(), node.semiaxes_mm.y());
    m.sad_slice_index = std::clamp<std::int64_t>(std::llround(node.center_mm.z() / spec.spacing_mm.z()), 0,
                                                 spec.dims[2] - 1);
    phantom.expected.push_back(m);
  }
  return phantom;
}

PhantomSpec random_phantom_spec(const RandomPhantomOptions& options) {
  if (options.node_count < 0) throw ValidationError("node_count must be non-negative");
  if (!(options.min_semiaxis_mm > 0.0) || options.max_semiaxis_mm < options.min_semiaxis_mm) {
    throw ValidationError("invalid semiaxis range");
  }
  PhantomSpec spec;
  spec.dims = options.dims;
  spec.spacing_mm = options.spacing_mm;
  spec.seed = options.seed;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> semiaxis(options.min_semiaxis_mm, options.max_semiaxis_mm);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double margin = 2.0 * options.spacing_mm.maxCoeff();
  constexpr int kAttempts = 10000;

  for (int n = 0; n < options.node_count; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      PhantomNode node;
      node.semiaxes_mm = {semiaxis(rng), semiaxis(rng), semiaxis(rng)};
      node.rotation_deg = std::floor(unit(rng) * 180.0);
      const Eigen::Vector3d extent = half_extents(node);
      bool fits = true;
      for (int axis = 0; axis < 3; ++axis) {
        const double lo = extent[axis] + options.spacing_mm[axis];
        const double hi = (double(options.dims[axis]) - 1.0) * options.spacing_mm[axis] - extent[axis] -
                          options.spacing_mm[axis];
        if (hi < lo) {
          fits = false;
          break;
        }
        node.center_mm[axis] = lo + unit(rng) * (hi - lo);
      }
      if (!fits) continue;
      const double radius = node.semiaxes_mm.maxCoeff();
      placed = std::ranges::all_of(spec.nodes, [&](const PhantomNode& other) {
        return (other.center_mm - node.center_mm).norm() > radius + other.semiaxes_mm.maxCoeff() + margin;
      });
      if (placed) spec.nodes.push_back(node);
    }
    if (!placed) {
      throw ValidationError("could not place phantom node " + std::to_string(n + 1) +
                            " without overlap; enlarge the grid or shrink the nodes");
    }
  }
  return spec;
}

namespace {

std::vector<double> parse_numbers(std::string_view text, std::size_t expected, int line_number,
                                  std::string_view key) {
  std::istringstream in{std::string(text)};
  std::vector<double> values;
  double value;
  while (in >> value) values.push_back(value);
  if (!in.eof() || (expected != 0 && values.size() != expected)) {
    throw ValidationError("phantom spec line " + std::to_string(line_number) + ": '" + std::string(key) +
                          "' expects " + std::to_string(expected) + " numbers");
  }
  return values;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace

PhantomSpec parse_phantom_spec(std::string_view text) {
  PhantomSpec spec;
  int random_nodes = 0;
  double lo = 3.0, hi = 10.0;
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
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("phantom spec line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "dims") {
      const auto v = parse_numbers(value, 3, line_number, key);
      for (int a = 0; a < 3; ++a) {
        if (v[a] != std::floor(v[a])) throw ValidationError("phantom dims must be integers");
        spec.dims[a] = std::int64_t(v[a]);
      }
    } else if (key == "spacing") {
      const auto v = parse_numbers(value, 3, line_number, key);
      spec.spacing_mm = {v[0], v[1], v[2]};
    } else if (key == "seed") {
      const auto v = parse_numbers(value, 1, line_number, key);
      if (v[0] < 0 || v[0] != std::floor(v[0])) throw ValidationError("phantom seed must be a non-negative integer");
      spec.seed = std::uint64_t(v[0]);
    } else if (key == "node") {
      const auto v = parse_numbers(value, 7, line_number, key);
      PhantomNode node;
      node.center_mm = {v[0], v[1], v[2]};
      node.semiaxes_mm = {v[3], v[4], v[5]};
      node.rotation_deg = v[6];
      spec.nodes.push_back(node);
    } else if (key == "random_nodes") {
      const auto v = parse_numbers(value, 1, line_number, key);
      random_nodes = int(v[0]);
    } else if (key == "semiaxis_range") {
      const auto v = parse_numbers(value, 2, line_number, key);
      lo = v[0];
      hi = v[1];
    } else {
      throw ValidationError("phantom spec line " + std::to_string(line_number) + ": unknown key '" +
                            std::string(key) + "'");
    }
  }
  if (random_nodes > 0) {
    RandomPhantomOptions options;
    options.dims = spec.dims;
    options.spacing_mm = spec.spacing_mm;
    options.node_count = random_nodes;
    options.min_semiaxis_mm = lo;
    options.max_semiaxis_mm = hi;
    options.seed = spec.seed;
    auto random = random_phantom_spec(options);
    // Random nodes avoid the explicit ones only through generate()'s check.
    spec.nodes.insert(spec.nodes.end(), random.nodes.begin(), random.nodes.end());
  }
  return spec;
}

std::string expectations_csv(const PhantomSpec& spec, const Phantom& phantom) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "node_index,voxel_count,volume_mm3,expected_sad_mm,expected_long_axis_mm,"
         "center_x_mm,center_y_mm,center_z_mm,semiaxis_a_mm,semiaxis_b_mm,semiaxis_c_mm,rotation_deg\n";
  for (std::size_t n = 0; n < phantom.expected.size(); ++n) {
    const auto& m = phantom.expected[n];
    const auto& node = spec.nodes[n];
    out << m.component_index << ',' << m.voxel_count << ',' << m.volume_mm3 << ',' << m.sad_mm << ','
        << m.long_axis_mm << ',' << node.center_mm.x() << ',' << node.center_mm.y() << ','
        << node.center_mm.z() << ',' << node.semiaxes_mm.x() << ',' << node.semiaxes_mm.y() << ','
        << node.semiaxes_mm.z() << ',' << node.rotation_deg << '\n';
  }
  return out.str();
}

}  // namespace nodemetry
