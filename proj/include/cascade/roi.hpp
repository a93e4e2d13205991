#pragma once

#include <utility>
#include <vector>

#include "cascade/morphology.hpp"
#include "cascade/volume.hpp"

namespace cascade {

/// Inclusive voxel box, remembering the full-grid dims it is clamped against.
struct RoiBox {
  Coord3 min{0, 0, 0};
  Coord3 max{0, 0, 0};
  Coord3 source_dims{0, 0, 0};

  Coord3 shape() const {
    return {max[0] - min[0] + 1, max[1] - min[1] + 1, max[2] - min[2] + 1};
  }
  bool operator==(const RoiBox&) const = default;
};

/// The component's tight bounding box on the grid it was labeled on.
RoiBox bounding_box(const std::vector<ComponentRecord>& records, std::int32_t label,
                    const GridMeta& grid);

/// Grows the box by `margin` voxels per side, clamped to the source grid.
/// margin 0 returns the box unchanged.
RoiBox expand_box(const RoiBox& b, std::int64_t margin);

Volume crop(const Volume& v, const RoiBox& b);
Mask crop(const Mask& m, const RoiBox& b);

/// Places each ROI mask back at its box and OR-combines overlaps; voxels
/// covered by no box are 0.
Mask paste_back(const GridMeta& full, const std::vector<std::pair<RoiBox, Mask>>& items);

}  // namespace cascade
