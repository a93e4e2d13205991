#include "cascade/anatomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cascade/distance.hpp"

namespace cascade {

namespace {

std::int32_t max_label(const LabelMap& labels) {
  std::int32_t m = 0;
  for (const auto v : labels.data) m = std::max(m, v);
  return m;
}

// component-size and intersection counts for all labels in one pass
void overlap_counts(const LabelMap& labels, const Mask& lung, std::vector<std::int64_t>& total,
                    std::vector<std::int64_t>& inside) {
  const std::int32_t top = max_label(labels);
  total.assign(static_cast<std::size_t>(top) + 1, 0);
  inside.assign(static_cast<std::size_t>(top) + 1, 0);
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const std::int32_t l = labels.data[i];
    if (l <= 0) continue;
    ++total[static_cast<std::size_t>(l)];
    inside[static_cast<std::size_t>(l)] += lung.data[i];
  }
}

// min squared voxel distance to the lung per label, from one shared EDT
std::vector<double> min_sq_distances(const LabelMap& labels, const Mask& lung,
                                     std::int32_t top) {
  const std::vector<double> d2 = edt_squared(lung, {1.0, 1.0, 1.0});
  std::vector<double> best(static_cast<std::size_t>(top) + 1,
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const std::int32_t l = labels.data[i];
    if (l > 0 && l <= top) best[static_cast<std::size_t>(l)] = std::min(best[static_cast<std::size_t>(l)], d2[i]);
  }
  return best;
}

}  // namespace

double overlap_fraction(const LabelMap& labels, std::int32_t label, const Mask& lung) {
  check_grid_compat(labels.meta, lung.meta);
  std::int64_t total = 0, inside = 0;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    if (labels.data[i] == label) {
      ++total;
      inside += lung.data[i];
    }
  }
  if (label <= 0 || total == 0) {
    std::ostringstream os;
    os << "label " << label << " not present in label map";
    throw UnknownLabel(os.str());
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

double surface_distance_voxels(const LabelMap& labels, std::int32_t label, const Mask& lung) {
  check_grid_compat(labels.meta, lung.meta);
  if (count_foreground(lung) == 0) throw EmptyLungMask("lung mask is empty");
  const std::vector<double> d2 = edt_squared(lung, {1.0, 1.0, 1.0});
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    if (labels.data[i] == label) {
      best = std::min(best, d2[i]);
      found = true;
    }
  }
  if (label <= 0 || !found) {
    std::ostringstream os;
    os << "label " << label << " not present in label map";
    throw UnknownLabel(os.str());
  }
  return std::sqrt(best);
}

ZoneBox mediastinal_zone(const Mask& lung) {
  Coord3 lo{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
            std::numeric_limits<std::int64_t>::max()};
  Coord3 hi{-1, -1, -1};
  for (std::size_t i = 0; i < lung.data.size(); ++i) {
    if (!lung.data[i]) continue;
    const Coord3 c = lung.meta.coords(i);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  if (hi[0] < 0) throw EmptyLungMask("lung mask is empty");

  const std::int64_t width = hi[0] - lo[0] + 1;
  const std::int64_t zx_lo = lo[0] + width / 3;
  const std::int64_t zx_hi = std::max(zx_lo, lo[0] + (2 * width) / 3 - 1);
  return ZoneBox{{zx_lo, lo[1], lo[2]}, {zx_hi, hi[1], hi[2]}};
}

std::vector<FilterDecision> filter_components(std::vector<ComponentRecord>& records,
                                              const LabelMap& labels, const Mask& lung,
                                              const PipelineConfig& cfg) {
  check_grid_compat(labels.meta, lung.meta);
  const ZoneBox zone = mediastinal_zone(lung);

  std::vector<std::int64_t> total, inside;
  overlap_counts(labels, lung, total, inside);
  const auto top = static_cast<std::int32_t>(total.size()) - 1;

  std::vector<double> min_d2;  // filled lazily, only if some component needs the rescue check

  std::vector<FilterDecision> decisions;
  decisions.reserve(records.size());
  for (auto& rec : records) {
    FilterDecision d{rec.label, Verdict::Discarded, FilterReason::None};
    const auto l = static_cast<std::size_t>(rec.label);
    if (rec.label <= 0 || rec.label > top || total[l] == 0) {
      std::ostringstream os;
      os << "record label " << rec.label << " not present in label map";
      throw UnknownLabel(os.str());
    }

    if (rec.voxels <= cfg.min_component_voxels) {
      d.reason = FilterReason::BelowMinVoxels;
      rec.verdict = d.verdict;
      rec.reason = d.reason;
      decisions.push_back(d);
      continue;
    }

    const double overlap = static_cast<double>(inside[l]) / static_cast<double>(total[l]);
    rec.overlap_fraction = overlap;
    const bool in_zone = zone.contains(rec.centroid);
    const double threshold = in_zone ? cfg.mediastinal_overlap_min : cfg.lung_overlap_min;

    if (overlap >= threshold) {
      d.verdict = Verdict::Kept;
      d.reason = FilterReason::PassedOverlap;
    } else if (!in_zone) {
      // surface-distance rescue, peripheral components only
      if (min_d2.empty()) min_d2 = min_sq_distances(labels, lung, top);
      const double sd = std::sqrt(min_d2[l]);
      rec.surface_distance = sd;
      if (sd <= cfg.surface_distance_max && rec.voxels > cfg.min_component_voxels) {
        d.verdict = Verdict::Kept;
        d.reason = FilterReason::RescuedBySurfaceDistance;
      } else {
        d.reason = FilterReason::LowOverlap;
      }
    } else {
      d.reason = FilterReason::LowOverlapMediastinal;
    }
    rec.verdict = d.verdict;
    rec.reason = d.reason;
    decisions.push_back(d);
  }
  return decisions;
}

std::vector<std::int32_t> select_top_k(std::vector<FilterDecision>& decisions,
                                       std::vector<ComponentRecord>& records, TopK k) {
  struct Item {
    std::int64_t voxels;
    std::int32_t label;
  };
  std::vector<Item> kept;
  for (const auto& d : decisions) {
    if (d.verdict != Verdict::Kept) continue;
    std::int64_t voxels = 0;
    for (const auto& r : records)
      if (r.label == d.label) voxels = r.voxels;
    kept.push_back({voxels, d.label});
  }
  std::sort(kept.begin(), kept.end(), [](const Item& a, const Item& b) {
    if (a.voxels != b.voxels) return a.voxels > b.voxels;
    return a.label < b.label;
  });

  const std::size_t limit = k.all ? kept.size() : std::min<std::size_t>(kept.size(), k.k);
  std::vector<std::int32_t> result;
  result.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) result.push_back(kept[i].label);

  for (std::size_t i = limit; i < kept.size(); ++i) {
    for (auto& d : decisions) {
      if (d.label == kept[i].label) {
        d.verdict = Verdict::Discarded;
        d.reason = FilterReason::DroppedByTopK;
      }
    }
    for (auto& r : records) {
      if (r.label == kept[i].label) {
        r.verdict = Verdict::Discarded;
        r.reason = FilterReason::DroppedByTopK;
      }
    }
  }
  return result;
}

}  // namespace cascade
