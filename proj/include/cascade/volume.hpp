#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {

using Coord3 = std::array<std::int64_t, 3>;
using Vec3 = std::array<double, 3>;

/// Geometry of a regular 3D voxel grid: extents in voxels, spacing in mm per
/// voxel, and the world position of voxel (0,0,0) in mm. Data attached to a
/// grid is stored flat in x-fastest order: index = x + dims[0]*(y + dims[1]*z),
/// matching the NIfTI on-disk layout.
struct GridMeta {
  Coord3 dims{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  /// Throws InvalidGrid unless all dims >= 1, all spacing > 0, and the voxel
  /// count fits the platform's addressable range.
  void validate() const;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x + dims[0] * (y + dims[1] * z));
  }

  Coord3 coords(std::size_t idx) const {
    const auto i = static_cast<std::int64_t>(idx);
    return {i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])};
  }

  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
  }
};

/// Checks that two grids can be combined voxel-wise: dims must match exactly,
/// spacing within 1e-4 relative tolerance. Origin differences are tolerated
/// (co-registered inputs are assumed) and only reported to stderr.
void check_grid_compat(const GridMeta& a, const GridMeta& b);

/// A flat 3D grid of T. Instances are treated as immutable once built; all
/// operations in this library return new grids rather than mutating inputs.
template <typename T>
struct Grid {
  GridMeta meta;
  std::vector<T> data;

  Grid() = default;

  /// Zero-initialized grid of the given geometry.
  explicit Grid(GridMeta m) : meta(m) {
    meta.validate();
    data.assign(meta.voxel_count(), T{});
  }

  Grid(GridMeta m, std::vector<T> d) : meta(m), data(std::move(d)) {
    meta.validate();
    if (data.size() != meta.voxel_count())
      throw InvalidGrid("grid data length does not match voxel count");
  }

  T& at(std::int64_t x, std::int64_t y, std::int64_t z) { return data[meta.index(x, y, z)]; }
  const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data[meta.index(x, y, z)];
  }

  std::size_t size() const { return data.size(); }
};

/// Scalar field (probabilities, intensities, uncertainty), 32-bit.
using Volume = Grid<float>;
/// Binary field; every voxel is exactly 0 or 1.
using Mask = Grid<std::uint8_t>;
/// Connected-component ids; 0 = background, labels contiguous 1..L.
using LabelMap = Grid<std::int32_t>;

/// Number of voxels equal to 1.
std::size_t count_foreground(const Mask& m);

/// Throws ValueOutOfRange unless every voxel is in [0,1] (NaN rejected).
void require_probability(const Volume& v, const char* what);

/// Throws ValueOutOfRange unless every voxel is exactly 0 or 1.
void require_binary(const Mask& m, const char* what);

}  // namespace cascade
