#include "cascade/morphology.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "cascade/kernels.hpp"

namespace cascade {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pending: return "pending";
    case Verdict::Kept: return "kept";
    case Verdict::Discarded: return "discarded";
  }
  return "?";
}

const char* to_string(FilterReason r) {
  switch (r) {
    case FilterReason::None: return "none";
    case FilterReason::BelowMinVoxels: return "below_min_voxels";
    case FilterReason::LowOverlap: return "low_overlap";
    case FilterReason::LowOverlapMediastinal: return "low_overlap_mediastinal";
    case FilterReason::RescuedBySurfaceDistance: return "rescued_by_surface_distance";
    case FilterReason::PassedOverlap: return "passed_overlap";
    case FilterReason::DroppedByTopK: return "dropped_by_top_k";
  }
  return "?";
}

Mask threshold_probability(const Volume& p, double t) {
  if (!(t > 0.0 && t < 1.0)) throw OutOfRange("threshold must be in (0,1)");
  require_probability(p, "threshold_probability");
  Mask out(p.meta);
  kern::active().threshold_ge(p.data.data(), p.data.size(), static_cast<float>(t),
                              out.data.data());
  return out;
}

namespace {

// One dilation iteration for radius <= 254 (the distance counters inside the
// kernels saturate at 255). Three separable axis passes.
Mask dilate_once(const Mask& m, int radius) {
  const auto& K = kern::active();
  const std::int64_t d0 = m.meta.dims[0], d1 = m.meta.dims[1], d2 = m.meta.dims[2];

  Mask a(m.meta);
  // x pass: rows are contiguous along the scan axis, so this one stays scalar.
  {
    const std::size_t rows = static_cast<std::size_t>(d1) * static_cast<std::size_t>(d2);
    std::vector<int> fwd(static_cast<std::size_t>(d0));
    const int far = static_cast<int>(d0) + radius + 1;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint8_t* in = m.data.data() + r * static_cast<std::size_t>(d0);
      std::uint8_t* out = a.data.data() + r * static_cast<std::size_t>(d0);
      int d = far;
      for (std::int64_t x = 0; x < d0; ++x) {
        d = in[x] ? 0 : d + 1;
        fwd[static_cast<std::size_t>(x)] = d;
      }
      d = far;
      for (std::int64_t x = d0 - 1; x >= 0; --x) {
        d = in[x] ? 0 : d + 1;
        out[x] = (std::min(fwd[static_cast<std::size_t>(x)], d) <= radius) ? 1 : 0;
      }
    }
  }

  Mask b(m.meta);
  std::vector<std::uint8_t> state(static_cast<std::size_t>(std::max(d0, d0 * d1)));
  // y pass, one xy slab at a time
  for (std::int64_t z = 0; z < d2; ++z) {
    const std::size_t base = static_cast<std::size_t>(z * d1 * d0);
    K.dilate_scan(a.data.data() + base, b.data.data() + base, state.data(),
                  static_cast<std::size_t>(d0), static_cast<std::size_t>(d1),
                  static_cast<std::size_t>(d0), radius);
  }
  // z pass over whole planes
  K.dilate_scan(b.data.data(), a.data.data(), state.data(),
                static_cast<std::size_t>(d0 * d1), static_cast<std::size_t>(d2),
                static_cast<std::size_t>(d0 * d1), radius);
  return a;
}

}  // namespace

Mask dilate(const Mask& m, int radius, int iterations) {
  if (radius < 1) throw OutOfRange("dilation radius must be >= 1");
  if (iterations < 0) throw OutOfRange("dilation iterations must be >= 0");
  require_binary(m, "dilate");
  Mask out = m;
  for (int it = 0; it < iterations; ++it) {
    int r = radius;
    // Chebyshev dilations compose: radius a then b equals radius a+b, so
    // oversized radii are folded into chunks the u8 counters can represent.
    while (r > 254) {
      out = dilate_once(out, 254);
      r -= 254;
    }
    out = dilate_once(out, r);
  }
  return out;
}

namespace {

std::vector<Coord3> neighbor_offsets(int connectivity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26)
    throw OutOfRange("connectivity must be 6, 18 or 26");
  std::vector<Coord3> offs;
  for (std::int64_t dz = -1; dz <= 1; ++dz)
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const int order = static_cast<int>(std::abs(dx) + std::abs(dy) + std::abs(dz));
        if (order == 0) continue;
        if (connectivity == 6 && order > 1) continue;
        if (connectivity == 18 && order > 2) continue;
        offs.push_back({dx, dy, dz});
      }
  return offs;
}

void sort_records(std::vector<ComponentRecord>& records) {
  std::sort(records.begin(), records.end(), [](const ComponentRecord& a, const ComponentRecord& b) {
    if (a.voxels != b.voxels) return a.voxels > b.voxels;
    return a.label < b.label;
  });
}

struct Accumulator {
  std::int64_t voxels = 0;
  Coord3 lo{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
            std::numeric_limits<std::int64_t>::max()};
  Coord3 hi{-1, -1, -1};
  Vec3 sum{0.0, 0.0, 0.0};

  void add(const Coord3& c) {
    ++voxels;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
      sum[a] += static_cast<double>(c[a]);
    }
  }

  ComponentRecord finish(std::int32_t label) const {
    ComponentRecord r;
    r.label = label;
    r.voxels = voxels;
    r.bbox_min = lo;
    r.bbox_max = hi;
    for (int a = 0; a < 3; ++a) r.centroid[a] = sum[a] / static_cast<double>(voxels);
    return r;
  }
};

}  // namespace

Labeling label_components(const Mask& m, int connectivity) {
  const auto offs = neighbor_offsets(connectivity);
  require_binary(m, "label_components");

  Labeling out{LabelMap(m.meta), {}};
  std::vector<std::size_t> queue;
  const auto& meta = m.meta;

  for (std::size_t start = 0; start < m.data.size(); ++start) {
    if (!m.data[start] || out.labels.data[start] != 0) continue;
    if (out.records.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
      throw TooManyComponents("more than 2^31-1 components");
    const auto label = static_cast<std::int32_t>(out.records.size() + 1);

    Accumulator acc;
    queue.clear();
    queue.push_back(start);
    out.labels.data[start] = label;
    while (!queue.empty()) {
      const std::size_t idx = queue.back();
      queue.pop_back();
      const Coord3 c = meta.coords(idx);
      acc.add(c);
      for (const auto& o : offs) {
        const std::int64_t x = c[0] + o[0], y = c[1] + o[1], z = c[2] + o[2];
        if (!meta.contains(x, y, z)) continue;
        const std::size_t n = meta.index(x, y, z);
        if (m.data[n] && out.labels.data[n] == 0) {
          out.labels.data[n] = label;
          queue.push_back(n);
        }
      }
    }
    out.records.push_back(acc.finish(label));
  }
  sort_records(out.records);
  return out;
}

Labeling restrict_to_mask(const LabelMap& labels, const Mask& m) {
  check_grid_compat(labels.meta, m.meta);
  require_binary(m, "restrict_to_mask");

  Labeling out{LabelMap(labels.meta), {}};
  std::vector<std::int32_t> remap;  // old label -> new label, grown on demand
  std::vector<Accumulator> accs;

  for (std::size_t idx = 0; idx < m.data.size(); ++idx) {
    if (!m.data[idx]) continue;
    const std::int32_t old = labels.data[idx];
    if (old <= 0) continue;
    if (static_cast<std::size_t>(old) >= remap.size()) remap.resize(old + 1, 0);
    if (remap[old] == 0) {
      remap[old] = static_cast<std::int32_t>(accs.size() + 1);
      accs.emplace_back();
    }
    const std::int32_t fresh = remap[old];
    out.labels.data[idx] = fresh;
    accs[static_cast<std::size_t>(fresh - 1)].add(labels.meta.coords(idx));
  }
  out.records.reserve(accs.size());
  for (std::size_t i = 0; i < accs.size(); ++i)
    out.records.push_back(accs[i].finish(static_cast<std::int32_t>(i + 1)));
  sort_records(out.records);
  return out;
}

}  // namespace cascade
