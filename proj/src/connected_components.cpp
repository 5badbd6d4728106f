#include "nodemetry/connected_components.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace nodemetry {

namespace {

// Neighbors already visited in a k-major, j, i-fastest raster scan.
constexpr std::array<Index3, 13> kBackward26{{
    {-1, -1, -1}, {0, -1, -1}, {1, -1, -1},
    {-1, 0, -1},  {0, 0, -1},  {1, 0, -1},
    {-1, 1, -1},  {0, 1, -1},  {1, 1, -1},
    {-1, -1, 0},  {0, -1, 0},  {1, -1, 0},
    {-1, 0, 0},
}};
constexpr std::array<Index3, 9> kBackward18{{
    {0, -1, -1}, {-1, 0, -1}, {0, 0, -1}, {1, 0, -1}, {0, 1, -1},
    {-1, -1, 0}, {0, -1, 0},  {1, -1, 0}, {-1, 0, 0},
}};
constexpr std::array<Index3, 3> kBackward6{{{0, 0, -1}, {0, -1, 0}, {-1, 0, 0}}};

class DisjointSet {
 public:
  std::uint32_t make() {
    const auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    size_.push_back(1);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace

Connectivity connectivity_from_int(int value) {
  switch (value) {
    case 6:
      return Connectivity::k6;
    case 18:
      return Connectivity::k18;
    case 26:
      return Connectivity::k26;
    default:
      throw ValidationError("connectivity must be 6, 18 or 26 (got " + std::to_string(value) + ")");
  }
}

std::span<const Index3> backward_offsets(Connectivity connectivity) {
  switch (connectivity) {
    case Connectivity::k6:
      return kBackward6;
    case Connectivity::k18:
      return kBackward18;
    case Connectivity::k26:
      return kBackward26;
  }
  return kBackward26;
}

ComponentSet::ComponentSet(Connectivity connectivity, Grid grid, std::vector<Run> runs, std::int64_t count)
    : connectivity_(connectivity),
      grid_(std::move(grid)),
      runs_(std::move(runs)),
      offsets_(static_cast<std::size_t>(count) + 1, 0) {
  for (const Run& r : runs_) offsets_[r.id] += r.length;
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  voxels_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // Raster-ordered runs fill each list in ascending order.
  for (const Run& r : runs_) {
    auto& at = cursor[r.id - 1];
    for (std::int64_t v = r.start; v < r.start + r.length; ++v) voxels_[static_cast<std::size_t>(at++)] = v;
  }
}

Volume<std::uint32_t> ComponentSet::component_of() const {
  Volume<std::uint32_t> ids(grid_, 0u);
  auto out = ids.data();
  for (const Run& r : runs_) {
    std::fill_n(out.begin() + r.start, r.length, r.id);
  }
  return ids;
}

std::span<const std::int64_t> ComponentSet::voxels(std::int64_t id) const {
  if (id < 1 || id > count()) throw RangeError("component id " + std::to_string(id) + " out of range");
  const auto begin = static_cast<std::size_t>(offsets_[id - 1]);
  const auto end = static_cast<std::size_t>(offsets_[id]);
  return std::span<const std::int64_t>(voxels_).subspan(begin, end - begin);
}

std::int64_t ComponentSet::size(std::int64_t id) const { return std::ssize(voxels(id)); }

namespace {

// A neighbouring row (dj, dk) and how far along x adjacency reaches.
struct RowNeighbor {
  std::int64_t dj = 0;
  std::int64_t dk = 0;
  std::int64_t reach = 0;
};

std::vector<RowNeighbor> row_neighbors(Connectivity connectivity) {
  std::vector<RowNeighbor> rows;
  for (const auto& [di, dj, dk] : backward_offsets(connectivity)) {
    if (dj == 0 && dk == 0) continue;  // same row: already one run
    auto it = std::find_if(rows.begin(), rows.end(), [&](const RowNeighbor& r) { return r.dj == dj && r.dk == dk; });
    if (it == rows.end()) {
      rows.push_back({dj, dk, std::abs(di)});
    } else {
      it->reach = std::max(it->reach, std::abs(di));
    }
  }
  return rows;
}

struct Span {
  std::int64_t x0 = 0;
  std::int64_t x1 = 0;  // inclusive
  std::uint32_t label = 0;
};

// Appends the foreground runs of one row, skipping zeros a word at a time.
void scan_row(const std::uint8_t* row, std::int64_t nx, std::vector<Span>& out) {
  std::int64_t i = 0;
  while (i < nx) {
    while (i + 8 <= nx) {
      std::uint64_t word;
      std::memcpy(&word, row + i, 8);
      if (word != 0) break;
      i += 8;
    }
    while (i < nx && row[i] == 0) ++i;
    if (i >= nx) break;
    const std::int64_t start = i;
    while (i < nx && row[i] != 0) ++i;
    out.push_back({start, i - 1, 0});
  }
}

}  // namespace

ComponentSet label_components(const MaskVolume& mask, Connectivity connectivity) {
  const Grid& grid = mask.grid();
  const auto [nx, ny, nz] = grid.dims;
  const auto neighbors = row_neighbors(connectivity);
  const auto in = mask.data();

  std::vector<Span> spans;
  std::vector<std::int64_t> row_begin(static_cast<std::size_t>(ny * nz) + 1, 0);
  std::vector<std::size_t> cursor(neighbors.size());
  DisjointSet sets;
  sets.make();  // slot 0 is unused

  for (std::int64_t k = 0; k < nz; ++k) {
    for (std::int64_t j = 0; j < ny; ++j) {
      const std::int64_t row = j + ny * k;
      const auto first = spans.size();
      row_begin[static_cast<std::size_t>(row)] = static_cast<std::int64_t>(first);
      scan_row(in.data() + row * nx, nx, spans);
      if (spans.size() == first) continue;

      for (std::size_t n = 0; n < neighbors.size(); ++n) {
        const std::int64_t nj = j + neighbors[n].dj, nk = k + neighbors[n].dk;
        cursor[n] = (nj < 0 || nj >= ny || nk < 0)
                        ? std::size_t(-1)
                        : static_cast<std::size_t>(row_begin[static_cast<std::size_t>(nj + ny * nk)]);
      }
      for (std::size_t s = first; s < spans.size(); ++s) {
        Span& span = spans[s];
        for (std::size_t n = 0; n < neighbors.size(); ++n) {
          if (cursor[n] == std::size_t(-1)) continue;
          const std::int64_t nrow = (j + neighbors[n].dj) + ny * (k + neighbors[n].dk);
          const auto end = static_cast<std::size_t>(row_begin[static_cast<std::size_t>(nrow) + 1]);
          const std::int64_t reach = neighbors[n].reach;
          std::size_t& c = cursor[n];
          while (c < end && spans[c].x1 + reach < span.x0) ++c;
          for (std::size_t o = c; o < end && spans[o].x0 <= span.x1 + reach; ++o) {
            span.label = span.label == 0 ? spans[o].label : sets.unite(span.label, spans[o].label);
          }
        }
        if (span.label == 0) span.label = sets.make();
      }
    }
  }
  row_begin.back() = static_cast<std::int64_t>(spans.size());

  // Dense ids in order of first appearance; spans are already raster-ordered.
  std::vector<std::uint32_t> dense(sets.size(), 0);
  std::uint32_t next = 0;
  std::vector<Run> runs;
  runs.reserve(spans.size());
  std::size_t s = 0;
  for (std::int64_t row = 0; row < ny * nz; ++row) {
    const auto end = static_cast<std::size_t>(row_begin[static_cast<std::size_t>(row) + 1]);
    for (; s < end; ++s) {
      const std::uint32_t root = sets.find(spans[s].label);
      if (dense[root] == 0) dense[root] = ++next;
      runs.push_back({row * nx + spans[s].x0, spans[s].x1 - spans[s].x0 + 1, dense[root]});
    }
  }
  return ComponentSet(connectivity, grid, std::move(runs), next);
}

ComponentSet filter_components(const ComponentSet& set, std::int64_t min_voxels) {
  if (min_voxels < 1) {
    throw ValidationError("min_voxels must be >= 1 (got " + std::to_string(min_voxels) + ")");
  }
  std::vector<std::uint32_t> remap(static_cast<std::size_t>(set.count()) + 1, 0);
  std::uint32_t next = 0;
  for (std::int64_t id = 1; id <= set.count(); ++id) {
    if (set.size(id) >= min_voxels) remap[static_cast<std::size_t>(id)] = ++next;
  }
  std::vector<Run> runs;
  for (const Run& r : set.runs()) {
    if (remap[r.id] != 0) runs.push_back({r.start, r.length, remap[r.id]});
  }
  return ComponentSet(set.connectivity(), set.grid(), std::move(runs), next);
}

}  // namespace nodemetry
