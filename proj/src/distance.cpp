#include "cascade/distance.hpp"

#include <algorithm>
#include <limits>

namespace cascade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance transform along one line of samples w apart.
// f may contain +inf (no seed reachable through that sample yet); such
// samples never enter the parabola envelope.
void dt_line(const double* f, double* d, std::int64_t n, double w, std::int64_t* v, double* z) {
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double xq = static_cast<double>(q) * w;
    double s = 0.0;
    while (true) {
      if (k < 0) {
        s = -kInf;
        break;
      }
      const double xv = static_cast<double>(v[k]) * w;
      s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      if (s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * w;
    while (z[j + 1] < xq) ++j;
    const double dx = xq - static_cast<double>(v[j]) * w;
    d[q] = dx * dx + f[v[j]];
  }
}

void axis_pass(std::vector<double>& g, const GridMeta& meta, int axis, double w) {
  const std::int64_t d0 = meta.dims[0], d1 = meta.dims[1], d2 = meta.dims[2];
  const std::int64_t n = meta.dims[axis];
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<std::int64_t> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  const auto run = [&](std::size_t base, std::size_t stride) {
    for (std::int64_t i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = g[base + i * stride];
    dt_line(f.data(), d.data(), n, w, v.data(), z.data());
    for (std::int64_t i = 0; i < n; ++i) g[base + i * stride] = d[static_cast<std::size_t>(i)];
  };

  if (axis == 0) {
    for (std::int64_t z2 = 0; z2 < d2; ++z2)
      for (std::int64_t y = 0; y < d1; ++y)
        run(static_cast<std::size_t>((z2 * d1 + y) * d0), 1);
  } else if (axis == 1) {
    for (std::int64_t z2 = 0; z2 < d2; ++z2)
      for (std::int64_t x = 0; x < d0; ++x)
        run(static_cast<std::size_t>(z2 * d1 * d0 + x), static_cast<std::size_t>(d0));
  } else {
    for (std::int64_t y = 0; y < d1; ++y)
      for (std::int64_t x = 0; x < d0; ++x)
        run(static_cast<std::size_t>(y * d0 + x), static_cast<std::size_t>(d0 * d1));
  }
}

}  // namespace

std::vector<double> edt_squared(const Mask& seeds, const Vec3& spacing) {
  for (int a = 0; a < 3; ++a)
    if (!(spacing[a] > 0.0)) throw InvalidGrid("edt spacing must be > 0");

  std::vector<double> g(seeds.data.size());
  for (std::size_t i = 0; i < seeds.data.size(); ++i) g[i] = seeds.data[i] ? 0.0 : kInf;
  for (int axis = 0; axis < 3; ++axis) axis_pass(g, seeds.meta, axis, spacing[axis]);
  return g;
}

Mask boundary_mask(const Mask& m) {
  Mask out(m.meta);
  const auto& meta = m.meta;
  const std::int64_t d0 = meta.dims[0], d1 = meta.dims[1], d2 = meta.dims[2];
  for (std::int64_t z = 0; z < d2; ++z)
    for (std::int64_t y = 0; y < d1; ++y)
      for (std::int64_t x = 0; x < d0; ++x) {
        const std::size_t idx = meta.index(x, y, z);
        if (!m.data[idx]) continue;
        const bool edge =
            x == 0 || x == d0 - 1 || y == 0 || y == d1 - 1 || z == 0 || z == d2 - 1;
        if (edge || !m.data[meta.index(x - 1, y, z)] || !m.data[meta.index(x + 1, y, z)] ||
            !m.data[meta.index(x, y - 1, z)] || !m.data[meta.index(x, y + 1, z)] ||
            !m.data[meta.index(x, y, z - 1)] || !m.data[meta.index(x, y, z + 1)])
          out.data[idx] = 1;
      }
  return out;
}

}  // namespace cascade
