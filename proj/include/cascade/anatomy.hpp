#pragma once

#include <vector>

#include "cascade/config.hpp"
#include "cascade/morphology.hpp"
#include "cascade/volume.hpp"

namespace cascade {

/// Inclusive voxel box of the central mediastinal zone.
struct ZoneBox {
  Coord3 min{0, 0, 0};
  Coord3 max{0, 0, 0};

  bool contains(const Vec3& point) const {
    for (int a = 0; a < 3; ++a)
      if (point[a] < static_cast<double>(min[a]) || point[a] > static_cast<double>(max[a]))
        return false;
    return true;
  }
};

struct FilterDecision {
  std::int32_t label = 0;
  Verdict verdict = Verdict::Pending;
  FilterReason reason = FilterReason::None;
};

/// |component ∩ lung| / |component| for one label.
double overlap_fraction(const LabelMap& labels, std::int32_t label, const Mask& lung);

/// Minimum Euclidean distance, in voxel index units (spacing ignored), from
/// any voxel of the component to the nearest lung foreground voxel. Zero when
/// the component touches the lung.
double surface_distance_voxels(const LabelMap& labels, std::int32_t label, const Mask& lung);

/// Central mediastinal zone: the middle third of the lung bounding box's
/// x-extent, over the full y/z extent of that box. Purely a function of the
/// lung mask.
ZoneBox mediastinal_zone(const Mask& lung);

/// Applies the anatomical filter chain to each component, in the order of
/// `records`: size floor, lung-overlap threshold (stricter inside the
/// mediastinal zone, decided by centroid), then the surface-distance rescue
/// for peripheral components only. Annotates each record with the statistics
/// it computed and its verdict, and returns one decision per record.
std::vector<FilterDecision> filter_components(std::vector<ComponentRecord>& records,
                                              const LabelMap& labels, const Mask& lung,
                                              const PipelineConfig& cfg);

/// Among Kept decisions, keeps the k largest components by voxel count (ties
/// broken by ascending label); the rest become Discarded(DroppedByTopK) in
/// both `decisions` and `records`. Returns the kept labels, largest first.
std::vector<std::int32_t> select_top_k(std::vector<FilterDecision>& decisions,
                                       std::vector<ComponentRecord>& records, TopK k);

}  // namespace cascade
