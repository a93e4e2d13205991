#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cascade/uncertainty.hpp"
#include "cascade/volume.hpp"

namespace cascade {

enum class TumorZone { Peripheral, Mediastinal, PleuralStraddling };

/// Where spurious spheres land relative to the lung. Mixed alternates
/// exterior/interior so a batch exercises both failure modes.
enum class SpuriousPlacement { Mixed, Exterior, Interior };

/// Synthetic case description. Everything downstream is a pure function of
/// this struct; the same seed always reproduces the same voxels.
struct PhantomSpec {
  std::uint64_t seed = 0;
  Coord3 dims{96, 96, 96};
  std::array<Vec3, 2> lung_semi_axes{{{16.0, 22.0, 30.0}, {16.0, 22.0, 30.0}}};
  double tumor_radius = 7.0;
  TumorZone tumor_zone = TumorZone::Peripheral;
  int n_spurious = 0;
  std::pair<double, double> spurious_radius_range{2.0, 3.5};
  double noise_flip_prob = 0.0;  // [0, 0.1]
  SpuriousPlacement spurious_placement = SpuriousPlacement::Mixed;

  void validate() const;  // throws OutOfRange on bad ranges
};

struct SphereGeom {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

struct PhantomCase {
  Mask lung;
  Mask gt;
  Volume coarse_prob;
  SampleStack stack;  // T = 8 dropout-like resamples of coarse_prob
  SphereGeom tumor;
  std::vector<SphereGeom> spurious;
};

/// Builds the lung (two ellipsoids), a spherical ground-truth tumor placed
/// per tumor_zone, a corrupted coarse prediction (0.9 inside the tumor, 0.05
/// background, spurious spheres at 0.7, optional value flips), and an
/// 8-sample jittered stack whose variance concentrates on sphere boundaries.
/// Exterior spurious spheres are placed more than surface_distance_max-ish
/// clearance (> 5 voxels plus the sphere radius) away from the lung; interior
/// ones fit fully inside it. Throws SpecInfeasible when geometry cannot be
/// satisfied.
PhantomCase generate(const PhantomSpec& spec);

}  // namespace cascade
