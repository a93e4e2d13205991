#include "cascade/roi.hpp"

#include <algorithm>
#include <sstream>

#include "cascade/kernels.hpp"

namespace cascade {

namespace {

void require_box_in_grid(const RoiBox& b, const GridMeta& grid, const char* what) {
  for (int a = 0; a < 3; ++a) {
    if (b.source_dims[a] != grid.dims[a]) {
      std::ostringstream os;
      os << what << ": box source dims differ from grid dims on axis " << a << " ("
         << b.source_dims[a] << " vs " << grid.dims[a] << ")";
      throw BoxMismatch(os.str());
    }
    if (b.min[a] < 0 || b.max[a] < b.min[a] || b.max[a] >= grid.dims[a])
      throw BoxMismatch(std::string(what) + ": box bounds outside grid");
  }
}

template <typename T>
Grid<T> crop_impl(const Grid<T>& g, const RoiBox& b) {
  require_box_in_grid(b, g.meta, "crop");
  GridMeta meta;
  meta.dims = b.shape();
  meta.spacing = g.meta.spacing;
  for (int a = 0; a < 3; ++a)
    meta.origin[a] = g.meta.origin[a] + g.meta.spacing[a] * static_cast<double>(b.min[a]);

  Grid<T> out(meta);
  const std::size_t run = static_cast<std::size_t>(meta.dims[0]);
  for (std::int64_t z = 0; z < meta.dims[2]; ++z)
    for (std::int64_t y = 0; y < meta.dims[1]; ++y) {
      const std::size_t src = g.meta.index(b.min[0], b.min[1] + y, b.min[2] + z);
      const std::size_t dst = meta.index(0, y, z);
      std::copy_n(g.data.begin() + src, run, out.data.begin() + dst);
    }
  return out;
}

}  // namespace

RoiBox bounding_box(const std::vector<ComponentRecord>& records, std::int32_t label,
                    const GridMeta& grid) {
  for (const auto& r : records) {
    if (r.label == label) {
      return RoiBox{r.bbox_min, r.bbox_max, grid.dims};
    }
  }
  std::ostringstream os;
  os << "label " << label << " has no component record";
  throw UnknownLabel(os.str());
}

RoiBox expand_box(const RoiBox& b, std::int64_t margin) {
  RoiBox out = b;
  for (int a = 0; a < 3; ++a) {
    out.min[a] = std::max<std::int64_t>(0, b.min[a] - margin);
    out.max[a] = std::min<std::int64_t>(b.source_dims[a] - 1, b.max[a] + margin);
  }
  return out;
}

Volume crop(const Volume& v, const RoiBox& b) { return crop_impl(v, b); }
Mask crop(const Mask& m, const RoiBox& b) { return crop_impl(m, b); }

Mask paste_back(const GridMeta& full, const std::vector<std::pair<RoiBox, Mask>>& items) {
  Mask out(full);
  const auto& K = kern::active();
  for (const auto& [box, roi] : items) {
    require_box_in_grid(box, full, "paste_back");
    const Coord3 shape = box.shape();
    for (int a = 0; a < 3; ++a) {
      if (roi.meta.dims[a] != shape[a]) {
        std::ostringstream os;
        os << "paste_back: roi dims " << roi.meta.dims[a] << " != box extent " << shape[a]
           << " on axis " << a;
        throw BoxMismatch(os.str());
      }
    }
    require_binary(roi, "paste_back");
    const std::size_t run = static_cast<std::size_t>(shape[0]);
    for (std::int64_t z = 0; z < shape[2]; ++z)
      for (std::int64_t y = 0; y < shape[1]; ++y) {
        const std::size_t dst = full.index(box.min[0], box.min[1] + y, box.min[2] + z);
        const std::size_t src = roi.meta.index(0, y, z);
        K.or_inplace(out.data.data() + dst, roi.data.data() + src, run);
      }
  }
  return out;
}

}  // namespace cascade
