#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/report.hpp"
#include "cascade/volume.hpp"

namespace cascade {

/// 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty.
double dice(const Mask& a, const Mask& b);

/// Directed boundary-to-boundary distances in mm (6-neighbor boundaries, the
/// grid edge counts as background): one entry per boundary voxel of A with
/// its distance to the nearest boundary voxel of B, and vice versa.
struct SurfaceDistanceSet {
  std::vector<double> a_to_b;
  std::vector<double> b_to_a;
};

SurfaceDistanceSet surface_distances(const Mask& a, const Mask& b, const Vec3& spacing_mm);

/// 95th percentile (linear interpolation between order statistics) of the
/// pooled set a_to_b ∪ b_to_a. Both masks empty -> 0; exactly one empty ->
/// +infinity. Note the nearest-rank percentile convention would differ at
/// small sample counts; this implementation interpolates.
double hd95(const Mask& a, const Mask& b, const Vec3& spacing_mm);

/// Dice after restricting both masks to the band of voxels within Euclidean
/// distance <= tol (voxel units) of the union of the two boundary sets.
/// 1.0 when both restricted masks are empty.
double boundary_dice(const Mask& a, const Mask& b, int tol);

struct CorrResult {
  double r = 0.0;
  double p = 1.0;
};

/// Product-moment correlation with a two-sided p-value from the exact
/// t-distribution (regularized incomplete beta, |error| < 1e-10).
CorrResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Pearson correlation of average-ranked data (ties share the mean rank).
CorrResult spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Regularized incomplete beta I_x(a, b); exposed for the statistics tests.
double ibeta_reg(double a, double b, double x);

struct GroupStats {
  std::int64_t n = 0;
  double mean_dice = 0.0;
  std::optional<double> mean_hd95;  // unset when every member was infinite
  std::int64_t hd95_excluded = 0;
};

/// Grouped means and component-count correlations over a case set. Cases
/// with infinite HD95 are excluded from HD95 means and HD95 correlations
/// (counted in hd95_excluded). Correlations needing fewer than 3 usable
/// points, or degenerate variance, stay unset.
struct TrendReport {
  std::map<std::string, GroupStats> groups;  // keys "1", "2", "3+"
  std::optional<CorrResult> pearson_dice;
  std::optional<CorrResult> spearman_dice;
  std::optional<CorrResult> pearson_hd95;
  std::optional<CorrResult> spearman_hd95;
  std::int64_t hd95_excluded = 0;
};

TrendReport component_trend(const std::vector<CaseReport>& cases);

}  // namespace cascade
