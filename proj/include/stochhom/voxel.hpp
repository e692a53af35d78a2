#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stochhom/geometry.hpp"

namespace stochhom {

using Dims = std::array<int, 3>;

// Periodic grid of phase labels, x-fastest: index = i + n1 * (j + n2 * k).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(Dims dims, int phase_count = 2);
  VoxelGrid(Dims dims, std::vector<std::uint8_t> labels, int phase_count = 2);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }
  int phase_count() const { return phase_count_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }
  std::uint8_t at(int i, int j, int k) const { return labels_[index(i, j, k)]; }
  std::uint8_t& at(int i, int j, int k) { return labels_[index(i, j, k)]; }

  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<std::uint8_t> labels() { return labels_; }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  Dims dims_{0, 0, 0};
  std::vector<std::uint8_t> labels_;
  int phase_count_ = 2;
};

struct VoxelizeOptions {
  // 2x2x2 sub-samples per voxel with strict-majority vote.
  bool supersample = false;
  bool require_cubic = true;
};

// Label of voxel (i,j,k) is the phase at its center ((i+0.5)/n1, ...).
VoxelGrid voxelize(const Microstructure& m, Dims dims, const VoxelizeOptions& opts = {});

// Label counts divided by the voxel count, indexed by phase id.
std::vector<double> discrete_volume_fraction(const VoxelGrid& g);

// Binary format: 8-byte magic "SHVOXEL\0", u32 version, u32 phase count,
// three u32 dims, then one byte per voxel (x-fastest). Little endian.
void write_voxel_file(const VoxelGrid& g, const std::filesystem::path& path);
VoxelGrid read_voxel_file(const std::filesystem::path& path);

}  // namespace stochhom
