#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cascade/volume.hpp"

namespace cascade {

enum class Verdict { Pending, Kept, Discarded };

enum class FilterReason {
  None,
  BelowMinVoxels,
  LowOverlap,
  LowOverlapMediastinal,
  RescuedBySurfaceDistance,
  PassedOverlap,
  DroppedByTopK,
};

const char* to_string(Verdict v);
const char* to_string(FilterReason r);

/// One connected component with its raster statistics. overlap_fraction and
/// surface_distance stay unset until the anatomy filters compute them.
struct ComponentRecord {
  std::int32_t label = 0;
  std::int64_t voxels = 0;
  Coord3 bbox_min{0, 0, 0};
  Coord3 bbox_max{0, 0, 0};
  Vec3 centroid{0.0, 0.0, 0.0};  // voxel coordinates
  std::optional<double> overlap_fraction;
  std::optional<double> surface_distance;
  Verdict verdict = Verdict::Pending;
  FilterReason reason = FilterReason::None;
};

struct Labeling {
  LabelMap labels;
  /// Sorted by voxel count descending, ties by ascending label id.
  std::vector<ComponentRecord> records;
};

/// Binarizes a probability volume: out = 1 iff p >= t. Every input voxel
/// must lie in [0,1] and t in (0,1).
Mask threshold_probability(const Volume& p, double t);

/// Chebyshev (cubic structuring element, side 2*radius+1) binary dilation,
/// applied `iterations` times. iterations = 0 returns the input unchanged;
/// the grid boundary acts as background.
Mask dilate(const Mask& m, int radius, int iterations);

/// Connected-component labeling. Labels are assigned in first-encounter
/// order under an x-fastest raster scan, so the result is a pure function of
/// the mask. connectivity is 6, 18 or 26.
Labeling label_components(const Mask& m, int connectivity);

/// Keeps the labeling's grouping but restricts it to the voxels of `m`
/// (used to undo the component-merging dilation: components are grouped on
/// the dilated mask, statistics and output voxels come from the original).
/// Labels are renumbered in first-encounter raster order; components that
/// lose every voxel disappear.
Labeling restrict_to_mask(const LabelMap& labels, const Mask& m);

}  // namespace cascade
