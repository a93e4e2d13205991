#pragma once

#include <vector>

#include "cascade/volume.hpp"

namespace cascade {

/// Exact 3D squared Euclidean distance transform (separable lower-envelope
/// algorithm), with per-axis sample spacing. Returns, for every voxel, the
/// squared distance to the nearest foreground voxel of `seeds`; +inf
/// everywhere when the seed mask is empty. Pass unit spacing for distances in
/// voxel index units, or the grid spacing for mm.
std::vector<double> edt_squared(const Mask& seeds, const Vec3& spacing);

/// Foreground voxels that touch the background through a face (6-neighbor);
/// the grid boundary counts as background.
Mask boundary_mask(const Mask& m);

}  // namespace cascade
