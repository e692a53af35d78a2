#include "stochhom/voxel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "stochhom/error.hpp"

namespace stochhom {

namespace {

constexpr char kMagic[8] = {'S', 'H', 'V', 'O', 'X', 'E', 'L', '\0'};
constexpr std::uint32_t kVoxelFormatVersion = 1;

// Half-extent of the axis-aligned box around a shape's center.
Vec3 half_extent(const Shape& s, double wave_grow) {
  if (const auto* sp = std::get_if<Sphere>(&s)) {
    double r = sp->radius * wave_grow;
    return {r, r, r};
  }
  const auto& c = std::get<Cylinder>(s);
  Vec3 e;
  for (int a = 0; a < 3; ++a) {
    double ax = c.axis[a];
    e[a] = c.half_length * std::abs(ax) + c.radius * wave_grow * std::sqrt(std::max(0.0, 1.0 - ax * ax));
  }
  return e;
}

// Visits each voxel index (wrapped) whose center may lie within the box.
template <class Fn>
void for_each_voxel_in_box(Vec3 center, Vec3 extent, const Dims& dims, Fn&& fn) {
  std::array<int, 3> lo{}, count{};
  for (int a = 0; a < 3; ++a) {
    const int n = dims[a];
    int first = static_cast<int>(std::floor((center[a] - extent[a]) * n - 0.5));
    int last = static_cast<int>(std::ceil((center[a] + extent[a]) * n - 0.5));
    lo[a] = first;
    count[a] = std::min(last - first + 1, n);
  }
  auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
  for (int dk = 0; dk < count[2]; ++dk) {
    const int k = wrap(lo[2] + dk, dims[2]);
    for (int dj = 0; dj < count[1]; ++dj) {
      const int j = wrap(lo[1] + dj, dims[1]);
      for (int di = 0; di < count[0]; ++di) fn(wrap(lo[0] + di, dims[0]), j, k);
    }
  }
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw Error(ErrorKind::FormatError, "truncated voxel header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

VoxelGrid::VoxelGrid(Dims dims, int phase_count) : dims_(dims), phase_count_(phase_count) {
  for (int n : dims)
    if (n <= 0) throw Error(ErrorKind::InvalidArgument, "voxel dims must be positive");
  if (phase_count < 1 || phase_count > 256) throw Error(ErrorKind::InvalidArgument, "phase count must lie in [1, 256]");
  labels_.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0);
}

VoxelGrid::VoxelGrid(Dims dims, std::vector<std::uint8_t> labels, int phase_count)
    : VoxelGrid(dims, phase_count) {
  if (labels.size() != labels_.size()) throw Error(ErrorKind::InvalidArgument, "label count does not match dims");
  for (auto l : labels)
    if (l >= phase_count) throw Error(ErrorKind::InvalidArgument, "label exceeds phase count");
  labels_ = std::move(labels);
}

VoxelGrid voxelize(const Microstructure& m, Dims dims, const VoxelizeOptions& opts) {
  for (int n : dims)
    if (n < 8) throw Error(ErrorKind::InvalidArgument, "voxel dims must be at least 8 per axis");
  if (opts.require_cubic && (dims[0] != dims[1] || dims[1] != dims[2]))
    throw Error(ErrorKind::InvalidArgument, "cubic voxel dims required");
  if (std::abs(m.cell.edge_length - 1.0) > 1e-15)
    throw Error(ErrorKind::InvalidArgument, "voxelization expects a unit cell");

  VoxelGrid g(dims, m.phase_count);
  const auto& imp = m.imperfections;
  const double grow = 1.0 + (imp.waves.active() ? imp.waves.amplitude : 0.0);
  auto center_of = [&](int i, int j, int k) {
    return Vec3{(i + 0.5) / dims[0], (j + 0.5) / dims[1], (k + 0.5) / dims[2]};
  };

  if (!opts.supersample) {
    // Reverse order so the first inclusion containing a point wins, as in
    // point_in_microstructure.
    for (auto it = m.inclusions.rbegin(); it != m.inclusions.rend(); ++it) {
      const Inclusion& inc = *it;
      for_each_voxel_in_box(inc.center(), half_extent(inc.shape, grow), dims, [&](int i, int j, int k) {
        Vec3 p = center_of(i, j, k);
        if (shape_contains(inc.shape, p, imp.waves, m.cell) && !in_defect_zone(imp, p, m.cell))
          g.at(i, j, k) = static_cast<std::uint8_t>(inc.phase_id);
      });
    }
    for (const auto& f : imp.fragments) {
      for_each_voxel_in_box(f.center, half_extent(f, 1.0), dims, [&](int i, int j, int k) {
        if (sphere_contains(f, center_of(i, j, k), m.cell)) g.at(i, j, k) = kInclusionPhase;
      });
    }
    return g;
  }

  // Supersampled path: candidates from bounding boxes, then 8 sub-samples.
  std::vector<std::uint8_t> candidate(g.size(), 0);
  for (const auto& inc : m.inclusions)
    for_each_voxel_in_box(inc.center(), half_extent(inc.shape, grow), dims,
                          [&](int i, int j, int k) { candidate[g.index(i, j, k)] = 1; });
  for (const auto& f : imp.fragments)
    for_each_voxel_in_box(f.center, half_extent(f, 1.0), dims,
                          [&](int i, int j, int k) { candidate[g.index(i, j, k)] = 1; });
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        if (!candidate[g.index(i, j, k)]) continue;
        std::array<int, 256> votes{};
        for (int s = 0; s < 8; ++s) {
          Vec3 p{(i + 0.25 + 0.5 * (s & 1)) / dims[0], (j + 0.25 + 0.5 * ((s >> 1) & 1)) / dims[1],
                 (k + 0.25 + 0.5 * ((s >> 2) & 1)) / dims[2]};
          ++votes[static_cast<std::size_t>(point_in_microstructure(wrap_point(p, m.cell), m))];
        }
        for (int phase = 1; phase < m.phase_count; ++phase)
          if (votes[static_cast<std::size_t>(phase)] >= 5) g.at(i, j, k) = static_cast<std::uint8_t>(phase);
      }
  return g;
}

std::vector<double> discrete_volume_fraction(const VoxelGrid& g) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(g.phase_count()), 0);
  for (auto l : g.labels()) ++counts[l];
  std::vector<double> out(counts.size());
  const double total = static_cast<double>(g.size());
  for (std::size_t p = 0; p < counts.size(); ++p) out[p] = counts[p] / total;
  return out;
}

void write_voxel_file(const VoxelGrid& g, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVoxelFormatVersion);
  put_u32(os, static_cast<std::uint32_t>(g.phase_count()));
  for (int n : g.dims()) put_u32(os, static_cast<std::uint32_t>(n));
  auto labels = g.labels();
  os.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!os) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

VoxelGrid read_voxel_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorKind::FormatError, path.string() + ": not a voxel file");
  const std::uint32_t version = get_u32(is);
  if (version != kVoxelFormatVersion)
    throw Error(ErrorKind::FormatError, path.string() + ": unsupported voxel format version");
  const std::uint32_t phases = get_u32(is);
  Dims dims{};
  for (int& n : dims) {
    std::uint32_t v = get_u32(is);
    if (v == 0 || v > 4096) throw Error(ErrorKind::FormatError, path.string() + ": bad dims");
    n = static_cast<int>(v);
  }
  if (phases < 1 || phases > 256) throw Error(ErrorKind::FormatError, path.string() + ": bad phase count");
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!is) throw Error(ErrorKind::FormatError, path.string() + ": truncated label data");
  if (is.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::FormatError, path.string() + ": trailing bytes after label data");
  for (auto l : labels)
    if (l >= phases) throw Error(ErrorKind::FormatError, path.string() + ": label exceeds phase count");
  return VoxelGrid(dims, std::move(labels), static_cast<int>(phases));
}

}  // namespace stochhom
