#include "cascade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cascade/distance.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double percentile_linear(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<double> gather_distances(const Mask& from_boundary, const std::vector<double>& d2) {
  std::vector<double> out;
  for (std::size_t i = 0; i < from_boundary.data.size(); ++i)
    if (from_boundary.data[i]) out.push_back(std::sqrt(d2[i]));
  return out;
}

}  // namespace

double dice(const Mask& a, const Mask& b) {
  check_grid_compat(a.meta, b.meta);
  require_binary(a, "dice");
  require_binary(b, "dice");
  const auto c = kern::active().pair_counts(a.data.data(), b.data.data(), a.data.size());
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * static_cast<double>(c.ab) / static_cast<double>(c.a + c.b);
}

SurfaceDistanceSet surface_distances(const Mask& a, const Mask& b, const Vec3& spacing_mm) {
  check_grid_compat(a.meta, b.meta);
  const Mask ba = boundary_mask(a);
  const Mask bb = boundary_mask(b);
  SurfaceDistanceSet s;
  if (count_foreground(ba) == 0 || count_foreground(bb) == 0) {
    // one side has no surface; callers decide what that means
    return s;
  }
  s.a_to_b = gather_distances(ba, edt_squared(bb, spacing_mm));
  s.b_to_a = gather_distances(bb, edt_squared(ba, spacing_mm));
  return s;
}

double hd95(const Mask& a, const Mask& b, const Vec3& spacing_mm) {
  check_grid_compat(a.meta, b.meta);
  require_binary(a, "hd95");
  require_binary(b, "hd95");
  const bool ea = count_foreground(a) == 0;
  const bool eb = count_foreground(b) == 0;
  if (ea && eb) return 0.0;
  if (ea || eb) return kInf;

  SurfaceDistanceSet s = surface_distances(a, b, spacing_mm);
  std::vector<double> pooled = std::move(s.a_to_b);
  pooled.insert(pooled.end(), s.b_to_a.begin(), s.b_to_a.end());
  return percentile_linear(std::move(pooled), 0.95);
}

double boundary_dice(const Mask& a, const Mask& b, int tol) {
  if (tol < 1) throw OutOfRange("boundary tolerance must be >= 1 voxel");
  check_grid_compat(a.meta, b.meta);
  require_binary(a, "boundary_dice");
  require_binary(b, "boundary_dice");

  Mask boundaries = boundary_mask(a);
  kern::active().or_inplace(boundaries.data.data(), boundary_mask(b).data.data(),
                            boundaries.data.size());
  if (count_foreground(boundaries) == 0) return 1.0;  // both masks empty

  const std::vector<double> d2 = edt_squared(boundaries, {1.0, 1.0, 1.0});
  const double tol2 = static_cast<double>(tol) * static_cast<double>(tol);
  std::uint64_t ca = 0, cb = 0, cab = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (d2[i] > tol2) continue;
    ca += a.data[i];
    cb += b.data[i];
    cab += static_cast<std::uint8_t>(a.data[i] & b.data[i]);
  }
  if (ca + cb == 0) return 1.0;
  return 2.0 * static_cast<double>(cab) / static_cast<double>(ca + cb);
}

namespace {

double betacf(double a, double b, double x) {
  // Lentz continued fraction for the incomplete beta (Numerical Recipes form).
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Two-sided p-value of |t| against Student-t with nu degrees of freedom:
// p = I_x(nu/2, 1/2) with x = nu / (nu + t^2).
double t_two_sided_p(double t, double nu) {
  const double x = nu / (nu + t * t);
  return ibeta_reg(nu / 2.0, 0.5, x);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

CorrResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw LengthMismatch("pearson: input lengths differ");
  const std::size_t n = xs.size();
  if (n < 3) throw LengthMismatch("pearson: need n >= 3");

  const double mx = mean_of(xs), my = mean_of(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateVariance("pearson: zero variance input");

  CorrResult res;
  res.r = std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
  const double nu = static_cast<double>(n - 2);
  if (std::abs(res.r) >= 1.0) {
    res.p = 0.0;
  } else {
    const double t = res.r * std::sqrt(nu / (1.0 - res.r * res.r));
    res.p = t_two_sided_p(std::abs(t), nu);
  }
  return res;
}

CorrResult spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw LengthMismatch("spearman: input lengths differ");
  if (xs.size() < 3) throw LengthMismatch("spearman: need n >= 3");
  return pearson(average_ranks(xs), average_ranks(ys));
}

TrendReport component_trend(const std::vector<CaseReport>& cases) {
  if (cases.empty()) throw EmptyInput("component_trend: no cases");

  TrendReport rep;
  struct GroupAcc {
    std::int64_t n = 0;
    double dice_sum = 0.0;
    double hd_sum = 0.0;
    std::int64_t hd_n = 0;
    std::int64_t hd_excluded = 0;
  };
  std::map<std::string, GroupAcc> acc;

  std::vector<double> comp_all, dice_all, comp_hd, hd_all;
  for (const auto& c : cases) {
    const auto count = c.components_after;
    const std::string key = count <= 0   ? "0"
                            : count == 1 ? "1"
                            : count == 2 ? "2"
                                         : "3+";
    auto& g = acc[key];
    ++g.n;
    g.dice_sum += c.dice;
    if (std::isinf(c.hd95_mm)) {
      ++g.hd_excluded;
      ++rep.hd95_excluded;
    } else {
      g.hd_sum += c.hd95_mm;
      ++g.hd_n;
      comp_hd.push_back(static_cast<double>(count));
      hd_all.push_back(c.hd95_mm);
    }
    comp_all.push_back(static_cast<double>(count));
    dice_all.push_back(c.dice);
  }

  for (const auto& [key, g] : acc) {
    GroupStats s;
    s.n = g.n;
    s.mean_dice = g.dice_sum / static_cast<double>(g.n);
    if (g.hd_n > 0) s.mean_hd95 = g.hd_sum / static_cast<double>(g.hd_n);
    s.hd95_excluded = g.hd_excluded;
    rep.groups[key] = s;
  }

  const auto correlate = [](const std::vector<double>& xs, const std::vector<double>& ys,
                            bool rank) -> std::optional<CorrResult> {
    if (xs.size() < 3) return std::nullopt;
    try {
      return rank ? spearman(xs, ys) : pearson(xs, ys);
    } catch (const DegenerateVariance&) {
      return std::nullopt;
    }
  };
  rep.pearson_dice = correlate(comp_all, dice_all, false);
  rep.spearman_dice = correlate(comp_all, dice_all, true);
  rep.pearson_hd95 = correlate(comp_hd, hd_all, false);
  rep.spearman_hd95 = correlate(comp_hd, hd_all, true);
  return rep;
}

}  // namespace cascade
