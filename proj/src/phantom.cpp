#include "cascade/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cascade/anatomy.hpp"
#include "cascade/distance.hpp"
#include "cascade/kernels.hpp"
#include "cascade/morphology.hpp"

namespace cascade {

namespace {

// Counter-based stream: draw i of stream s is a pure function of
// (seed, s, i), so generation order and threading never matter.
struct CounterRng {
  std::uint64_t base;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  CounterRng(std::uint64_t seed, std::uint64_t stream) : base(mix(mix(seed) ^ stream)) {}

  std::uint64_t u64(std::uint64_t counter) const { return mix(base ^ (counter * 0xd6e8feb86659fd93ull)); }
  double unit(std::uint64_t counter) const {
    return static_cast<double>(u64(counter) >> 11) * 0x1.0p-53;
  }
};

enum Stream : std::uint64_t {
  kStreamSpurious = 1,
  kStreamFlips = 2,
  kStreamJitter = 3,
};

using Sphere = SphereGeom;

void rasterize_ellipsoid(Mask& m, const Vec3& center, const Vec3& semi_axes) {
  const auto& d = m.meta.dims;
  for (std::int64_t z = 0; z < d[2]; ++z)
    for (std::int64_t y = 0; y < d[1]; ++y)
      for (std::int64_t x = 0; x < d[0]; ++x) {
        const double ex = (static_cast<double>(x) - center[0]) / semi_axes[0];
        const double ey = (static_cast<double>(y) - center[1]) / semi_axes[1];
        const double ez = (static_cast<double>(z) - center[2]) / semi_axes[2];
        if (ex * ex + ey * ey + ez * ez <= 1.0) m.data[m.meta.index(x, y, z)] = 1;
      }
}

template <typename Fn>
void for_each_sphere_voxel(const GridMeta& meta, const Sphere& s, Fn&& fn) {
  const double r2 = s.radius * s.radius;
  const auto lo = [&](int a) {
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(s.center[a] - s.radius)));
  };
  const auto hi = [&](int a) {
    return std::min<std::int64_t>(meta.dims[a] - 1,
                                  static_cast<std::int64_t>(std::ceil(s.center[a] + s.radius)));
  };
  for (std::int64_t z = lo(2); z <= hi(2); ++z)
    for (std::int64_t y = lo(1); y <= hi(1); ++y)
      for (std::int64_t x = lo(0); x <= hi(0); ++x) {
        const double dx = static_cast<double>(x) - s.center[0];
        const double dy = static_cast<double>(y) - s.center[1];
        const double dz = static_cast<double>(z) - s.center[2];
        if (dx * dx + dy * dy + dz * dz <= r2) fn(meta.index(x, y, z));
      }
}

bool sphere_fits(const GridMeta& meta, const Sphere& s, double margin) {
  for (int a = 0; a < 3; ++a) {
    if (s.center[a] - s.radius < margin) return false;
    if (s.center[a] + s.radius > static_cast<double>(meta.dims[a] - 1) - margin) return false;
  }
  return true;
}

double dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double sample_sq(const std::vector<double>& field, const GridMeta& meta, const Vec3& p) {
  const auto x = static_cast<std::int64_t>(std::llround(p[0]));
  const auto y = static_cast<std::int64_t>(std::llround(p[1]));
  const auto z = static_cast<std::int64_t>(std::llround(p[2]));
  return field[meta.index(x, y, z)];
}

double lung_overlap_of_sphere(const Mask& lung, const Sphere& s) {
  std::int64_t total = 0, inside = 0;
  for_each_sphere_voxel(lung.meta, s, [&](std::size_t idx) {
    ++total;
    inside += lung.data[idx];
  });
  if (total == 0) return 0.0;
  return static_cast<double>(inside) / static_cast<double>(total);
}

Sphere place_tumor(const PhantomSpec& spec, const Mask& lung, const std::vector<double>& depth_sq,
                   const ZoneBox& zone) {
  const GridMeta& meta = lung.meta;
  const double r = spec.tumor_radius;

  switch (spec.tumor_zone) {
    case TumorZone::Peripheral: {
      // deepest interior voxel left of the mediastinal zone
      double best = -1.0;
      Vec3 center{};
      for (std::size_t i = 0; i < lung.data.size(); ++i) {
        if (!lung.data[i]) continue;
        const Coord3 c = meta.coords(i);
        if (c[0] >= zone.min[0]) continue;
        if (depth_sq[i] > best) {
          best = depth_sq[i];
          center = {static_cast<double>(c[0]), static_cast<double>(c[1]),
                    static_cast<double>(c[2])};
        }
      }
      if (best < (r + 1.0) * (r + 1.0))
        throw SpecInfeasible("peripheral tumor does not fit inside the lung");
      const Sphere s{center, r};
      if (!sphere_fits(meta, s, 1.0)) throw SpecInfeasible("peripheral tumor outside grid");
      return s;
    }
    case TumorZone::Mediastinal: {
      const Vec3 center{static_cast<double>(meta.dims[0] - 1) / 2.0,
                        static_cast<double>(meta.dims[1] - 1) / 2.0,
                        static_cast<double>(meta.dims[2] - 1) / 2.0};
      if (!zone.contains(center))
        throw SpecInfeasible("grid centre is outside the mediastinal zone");
      const Sphere s{center, r};
      if (!sphere_fits(meta, s, 1.0)) throw SpecInfeasible("mediastinal tumor outside grid");
      return s;
    }
    case TumorZone::PleuralStraddling: {
      // Start on the lateral lung surface at mid-height and walk along x
      // until the voxelized overlap lands in [0.3, 0.8].
      const std::int64_t cy = meta.dims[1] / 2;
      const std::int64_t cz = meta.dims[2] / 2;
      std::int64_t sx = -1;
      for (std::int64_t x = 0; x < meta.dims[0]; ++x) {
        if (lung.at(x, cy, cz)) {
          sx = x;
          break;
        }
      }
      if (sx < 0) throw SpecInfeasible("lung mask empty at mid-plane");
      for (std::int64_t step = 0; step <= 2 * static_cast<std::int64_t>(r) + 4; ++step) {
        const Sphere s{{static_cast<double>(sx + step), static_cast<double>(cy),
                        static_cast<double>(cz)},
                       r};
        if (!sphere_fits(meta, s, 1.0)) continue;
        const double overlap = lung_overlap_of_sphere(lung, s);
        if (overlap >= 0.3 && overlap <= 0.8) return s;
      }
      throw SpecInfeasible("no pleural-straddling placement reaches overlap in [0.3, 0.8]");
    }
  }
  throw SpecInfeasible("unknown tumor zone");
}

}  // namespace

void PhantomSpec::validate() const {
  for (int a = 0; a < 3; ++a)
    if (dims[a] < 8) throw OutOfRange("phantom dims must be >= 8 voxels per axis");
  for (const auto& axes : lung_semi_axes)
    for (int a = 0; a < 3; ++a)
      if (!(axes[a] >= 1.0)) throw OutOfRange("lung semi-axes must be >= 1 voxel");
  if (!(tumor_radius >= 1.0)) throw OutOfRange("tumor radius must be >= 1 voxel");
  if (n_spurious < 0) throw OutOfRange("n_spurious must be >= 0");
  if (!(spurious_radius_range.first >= 1.0) ||
      !(spurious_radius_range.second >= spurious_radius_range.first))
    throw OutOfRange("spurious radius range must satisfy 1 <= min <= max");
  if (!(noise_flip_prob >= 0.0 && noise_flip_prob <= 0.1))
    throw OutOfRange("noise_flip_prob must be in [0, 0.1]");
}

PhantomCase generate(const PhantomSpec& spec) {
  spec.validate();
  GridMeta meta;
  meta.dims = spec.dims;
  meta.validate();

  PhantomCase out{Mask(meta), Mask(meta), Volume(meta), {} };

  // two ellipsoidal lungs, centred at 30% / 70% of the x extent
  const double dx = static_cast<double>(meta.dims[0] - 1);
  const double dy = static_cast<double>(meta.dims[1] - 1);
  const double dz = static_cast<double>(meta.dims[2] - 1);
  rasterize_ellipsoid(out.lung, {0.30 * dx, 0.5 * dy, 0.5 * dz}, spec.lung_semi_axes[0]);
  rasterize_ellipsoid(out.lung, {0.70 * dx, 0.5 * dy, 0.5 * dz}, spec.lung_semi_axes[1]);
  if (count_foreground(out.lung) == 0) throw SpecInfeasible("lung ellipsoids rasterize to nothing");

  const std::vector<double> exterior_sq = edt_squared(out.lung, {1.0, 1.0, 1.0});
  Mask background(meta);
  for (std::size_t i = 0; i < background.data.size(); ++i)
    background.data[i] = out.lung.data[i] ? 0 : 1;
  const std::vector<double> depth_sq = edt_squared(background, {1.0, 1.0, 1.0});

  const ZoneBox zone = mediastinal_zone(out.lung);
  const Sphere tumor = place_tumor(spec, out.lung, depth_sq, zone);
  out.tumor = tumor;
  for_each_sphere_voxel(meta, tumor, [&](std::size_t idx) { out.gt.data[idx] = 1; });

  // spurious spheres, placed by deterministic rejection sampling
  const CounterRng spur(spec.seed, kStreamSpurious);
  std::uint64_t draw = 0;
  std::vector<Sphere> spurious;
  constexpr double kExteriorClearance = 5.0;  // matches the default rescue threshold
  for (int i = 0; i < spec.n_spurious; ++i) {
    const bool exterior = spec.spurious_placement == SpuriousPlacement::Exterior ||
                          (spec.spurious_placement == SpuriousPlacement::Mixed && i % 2 == 0);
    const double radius =
        spec.spurious_radius_range.first +
        spur.unit(draw++) * (spec.spurious_radius_range.second - spec.spurious_radius_range.first);
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const Vec3 c{spur.unit(draw++) * dx, spur.unit(draw++) * dy, spur.unit(draw++) * dz};
      const Sphere s{c, radius};
      if (!sphere_fits(meta, s, 1.0)) continue;
      if (exterior) {
        // every voxel of the sphere must end up > 5 voxels from the lung
        if (std::sqrt(sample_sq(exterior_sq, meta, c)) < radius + kExteriorClearance + 2.5)
          continue;
      } else {
        if (std::sqrt(sample_sq(depth_sq, meta, c)) < radius + 2.0) continue;
      }
      if (dist(c, tumor.center) < radius + tumor.radius + 4.0) continue;
      bool clash = false;
      for (const auto& other : spurious)
        if (dist(c, other.center) < radius + other.radius + 4.0) clash = true;
      if (clash) continue;
      spurious.push_back(s);
      placed = true;
    }
    if (!placed) throw SpecInfeasible("could not place spurious sphere " + std::to_string(i));
  }
  out.spurious = spurious;

  // coarse prediction: clean probabilities, then spurious spheres, then flips
  std::fill(out.coarse_prob.data.begin(), out.coarse_prob.data.end(), 0.05f);
  for_each_sphere_voxel(meta, tumor, [&](std::size_t idx) { out.coarse_prob.data[idx] = 0.9f; });
  Mask sphere_union = out.gt;
  for (const auto& s : spurious)
    for_each_sphere_voxel(meta, s, [&](std::size_t idx) {
      out.coarse_prob.data[idx] = 0.7f;
      sphere_union.data[idx] = 1;
    });
  if (spec.noise_flip_prob > 0.0) {
    const CounterRng flips(spec.seed, kStreamFlips);
    for (std::size_t i = 0; i < out.coarse_prob.data.size(); ++i)
      if (flips.unit(i) < spec.noise_flip_prob)
        out.coarse_prob.data[i] = 1.0f - out.coarse_prob.data[i];
  }

  // boundary band of the sphere union: within Chebyshev distance 1 of both
  // foreground and background
  Mask inv(meta);
  for (std::size_t i = 0; i < inv.data.size(); ++i) inv.data[i] = sphere_union.data[i] ? 0 : 1;
  Mask band = dilate(sphere_union, 1, 1);
  const Mask grown_inv = dilate(inv, 1, 1);
  for (std::size_t i = 0; i < band.data.size(); ++i) band.data[i] &= grown_inv.data[i];

  // MC-dropout-like stack: uniform jitter, much wider on sphere boundaries
  constexpr int kSamples = 8;
  constexpr double kBaseJitter = 0.02;
  constexpr double kBoundaryJitter = 0.30;
  out.stack.samples.reserve(kSamples);
  for (int t = 0; t < kSamples; ++t) {
    const CounterRng jitter(spec.seed, kStreamJitter + 16ull * static_cast<std::uint64_t>(t));
    Volume v(meta);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      const double amp = kBaseJitter + (band.data[i] ? kBoundaryJitter : 0.0);
      const double x =
          static_cast<double>(out.coarse_prob.data[i]) + amp * (2.0 * jitter.unit(i) - 1.0);
      v.data[i] = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
    out.stack.samples.push_back(std::move(v));
  }
  return out;
}

}  // namespace cascade
