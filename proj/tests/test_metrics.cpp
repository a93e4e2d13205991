#include "doctest.h"

#include <cmath>

#include "cascade/metrics.hpp"
#include "test_util.hpp"

using namespace cascade;
using testutil::Rng;

TEST_CASE("dice") {
  const GridMeta meta = testutil::cube_meta(6);
  Rng rng(71);
  Mask a(meta), b(meta);

  SUBCASE("identical nonempty masks") {
    a.at(1, 1, 1) = a.at(2, 2, 2) = 1;
    CHECK(dice(a, a) == 1.0);
  }
  SUBCASE("disjoint nonempty masks") {
    a.at(0, 0, 0) = 1;
    b.at(5, 5, 5) = 1;
    CHECK(dice(a, b) == 0.0);
  }
  SUBCASE("|A|=4, |B|=4, |A∩B|=3") {
    for (std::int64_t x = 0; x < 4; ++x) a.at(x, 0, 0) = 1;
    for (std::int64_t x = 1; x < 5; ++x) b.at(x, 0, 0) = 1;
    CHECK(dice(a, b) == doctest::Approx(0.75));
  }
  SUBCASE("both empty") { CHECK(dice(a, b) == 1.0); }
  SUBCASE("symmetry on random masks") {
    for (int t = 0; t < 10; ++t) {
      const Mask x = testutil::random_mask(meta, 0.3, rng);
      const Mask y = testutil::random_mask(meta, 0.5, rng);
      CHECK(dice(x, y) == dice(y, x));
    }
  }
}

TEST_CASE("hd95 basic cases") {
  const GridMeta meta = testutil::cube_meta(16);
  Mask a(meta), b(meta);

  SUBCASE("identical masks") {
    a.at(4, 4, 4) = 1;
    CHECK(hd95(a, a, {1, 1, 1}) == 0.0);
  }
  SUBCASE("two voxels 10 apart on x") {
    a.at(2, 8, 8) = 1;
    b.at(12, 8, 8) = 1;
    CHECK(hd95(a, b, {1, 1, 1}) == doctest::Approx(10.0).epsilon(1e-12));
    // anisotropic spacing scales the axis
    CHECK(hd95(a, b, {2, 1, 1}) == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("one empty mask") {
    b.at(3, 3, 3) = 1;
    CHECK(std::isinf(hd95(a, b, {1, 1, 1})));
    CHECK(std::isinf(hd95(b, a, {1, 1, 1})));
  }
  SUBCASE("both empty") { CHECK(hd95(a, b, {1, 1, 1}) == 0.0); }
}

TEST_CASE("hd95 equals the exhaustive all-pairs oracle") {
  Rng rng(72);
  const Vec3 spacing{1.0, 1.5, 2.0};
  const GridMeta meta = testutil::cube_meta(12, spacing);
  for (int trial = 0; trial < 25; ++trial) {
    Mask a = testutil::random_mask(meta, 0.2, rng);
    Mask b = testutil::random_mask(meta, 0.25, rng);
    const double expect = testutil::oracle_hd95(a, b, spacing);
    const double got = hd95(a, b, spacing);
    if (std::isinf(expect)) {
      CHECK(std::isinf(got));
    } else {
      CHECK(got == doctest::Approx(expect).epsilon(0).scale(1).epsilon(1e-12));
      CHECK(std::abs(got - expect) < 1e-9);
    }
    CHECK(hd95(a, b, spacing) == hd95(b, a, spacing));
  }
}

TEST_CASE("boundary_dice") {
  const GridMeta meta = testutil::cube_meta(16);

  SUBCASE("identical masks") {
    Mask a(meta);
    for (std::int64_t z = 4; z < 9; ++z)
      for (std::int64_t y = 4; y < 9; ++y)
        for (std::int64_t x = 4; x < 9; ++x) a.at(x, y, z) = 1;
    CHECK(boundary_dice(a, a, 2) == 1.0);
  }
  SUBCASE("distant disjoint masks") {
    Mask a(meta), b(meta);
    a.at(1, 1, 1) = 1;
    b.at(14, 14, 14) = 1;
    CHECK(boundary_dice(a, b, 2) == 0.0);
  }
  SUBCASE("both empty") {
    const Mask a(meta), b(meta);
    CHECK(boundary_dice(a, b, 2) == 1.0);
  }
  SUBCASE("concentric cubes versus brute-force band restriction") {
    Mask inner(meta), outer(meta);
    for (std::int64_t z = 5; z <= 10; ++z)
      for (std::int64_t y = 5; y <= 10; ++y)
        for (std::int64_t x = 5; x <= 10; ++x) {
          outer.at(x, y, z) = 1;
          if (x >= 6 && x <= 9 && y >= 6 && y <= 9 && z >= 6 && z <= 9) inner.at(x, y, z) = 1;
        }
    const int tol = 2;

    // oracle: boundaries, union, exhaustive distance band, then plain dice
    const auto ba = testutil::oracle_boundary(inner);
    const auto bb = testutil::oracle_boundary(outer);
    auto uni = ba;
    uni.insert(uni.end(), bb.begin(), bb.end());
    std::uint64_t ca = 0, cb = 0, cab = 0;
    for (std::size_t i = 0; i < inner.data.size(); ++i) {
      const auto c = meta.coords(i);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& u : uni) {
        const double dx = static_cast<double>(c[0] - u[0]);
        const double dy = static_cast<double>(c[1] - u[1]);
        const double dz = static_cast<double>(c[2] - u[2]);
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      if (best > tol * tol) continue;
      ca += inner.data[i];
      cb += outer.data[i];
      cab += static_cast<std::uint8_t>(inner.data[i] & outer.data[i]);
    }
    const double expect = 2.0 * double(cab) / double(ca + cb);
    CHECK(boundary_dice(inner, outer, tol) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(boundary_dice(inner, outer, tol) == boundary_dice(outer, inner, tol));
  }
}

TEST_CASE("pearson") {
  SUBCASE("perfect linear") {
    const auto r = pearson({1, 2, 3}, {2, 4, 6});
    CHECK(r.r == doctest::Approx(1.0));
    CHECK(r.p == doctest::Approx(0.0).scale(1));
  }
  SUBCASE("anti-linear") {
    const auto r = pearson({1, 2, 3}, {6, 4, 2});
    CHECK(r.r == doctest::Approx(-1.0));
  }
  SUBCASE("paper pairing: r=-0.55 maps to p near 0.021 at n=17") {
    // build 17 points with sample correlation exactly -0.55 via the
    // two-variable construction y = r*x + sqrt(1-r^2)*z with x ⟂ z
    const int n = 17;
    std::vector<double> x(n), z(n);
    for (int i = 0; i < n; ++i) {
      x[i] = std::cos(2.0 * 3.14159265358979 * (i + 0.25) / n);
      z[i] = std::sin(4.0 * 3.14159265358979 * (i + 0.25) / n);
    }
    // orthogonalize z against x and normalize both (Gram-Schmidt)
    const auto demean = [](std::vector<double>& v) {
      double m = 0;
      for (double a : v) m += a;
      m /= v.size();
      for (double& a : v) a -= m;
    };
    demean(x);
    demean(z);
    double xz = 0, xx = 0;
    for (int i = 0; i < n; ++i) {
      xz += x[i] * z[i];
      xx += x[i] * x[i];
    }
    for (int i = 0; i < n; ++i) z[i] -= xz / xx * x[i];
    double zz = 0;
    for (int i = 0; i < n; ++i) zz += z[i] * z[i];
    const double r_target = -0.55;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
      y[i] = r_target * x[i] / std::sqrt(xx) +
             std::sqrt(1 - r_target * r_target) * z[i] / std::sqrt(zz);
    const auto res = pearson(x, y);
    CHECK(res.r == doctest::Approx(-0.55).epsilon(1e-9));
    CHECK(res.p == doctest::Approx(0.0222).epsilon(0.05));  // rounds to the reported 0.021-0.022
    // and the p-value agrees with the quadrature oracle to 1e-10
    const double t = res.r * std::sqrt((n - 2) / (1.0 - res.r * res.r));
    CHECK(res.p == doctest::Approx(testutil::oracle_t_two_sided_p(t, n - 2)).epsilon(1e-10));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), LengthMismatch);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), LengthMismatch);
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), DegenerateVariance);
  }
}

TEST_CASE("p-values match the t-distribution quadrature oracle") {
  for (const int n : {5, 17, 100}) {
    for (const double r : {0.9, -0.9, 0.55, -0.55, 0.0}) {
      const double nu = n - 2;
      double p_expected = 1.0;
      if (r != 0.0) {
        const double t = r * std::sqrt(nu / (1.0 - r * r));
        p_expected = testutil::oracle_t_two_sided_p(t, nu);
      }
      // drive through ibeta directly, as pearson would
      const double t = r == 0.0 ? 0.0 : r * std::sqrt(nu / (1.0 - r * r));
      const double p_impl = ibeta_reg(nu / 2.0, 0.5, nu / (nu + t * t));
      CHECK(std::abs(p_impl - p_expected) < 1e-8);
    }
  }
}

TEST_CASE("spearman") {
  SUBCASE("monotone sequences") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 25, 90}).r == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {7, 5, 3, -2}).r == doctest::Approx(-1.0));
  }
  SUBCASE("ties: equals the rank-then-pearson oracle exactly") {
    const std::vector<double> xs{1, 2, 2, 3, 5, 5, 5, 9};
    const std::vector<double> ys{3, 3, 1, 4, 4, 8, 2, 2};
    const auto got = spearman(xs, ys);
    const auto expect =
        pearson(testutil::oracle_average_ranks(xs), testutil::oracle_average_ranks(ys));
    CHECK(got.r == expect.r);
    CHECK(got.p == expect.p);
  }
  SUBCASE("affine invariance of r and p") {
    Rng rng(73);
    std::vector<double> xs(12), ys(12);
    for (auto& v : xs) v = rng.unit();
    for (auto& v : ys) v = rng.unit();
    const auto base_p = pearson(xs, ys);
    const auto base_s = spearman(xs, ys);
    std::vector<double> xs2(xs), ys2(ys);
    for (auto& v : xs2) v = 3.5 * v + 11.0;
    for (auto& v : ys2) v = 0.25 * v - 2.0;
    const auto aff_p = pearson(xs2, ys2);
    const auto aff_s = spearman(xs2, ys2);
    CHECK(aff_p.r == doctest::Approx(base_p.r).epsilon(1e-12));
    CHECK(aff_p.p == doctest::Approx(base_p.p).epsilon(1e-12));
    // ranks are untouched by increasing affine maps: spearman is exact
    CHECK(aff_s.r == base_s.r);
    CHECK(aff_s.p == base_s.p);
  }
}

TEST_CASE("component_trend") {
  const auto mk = [](std::int64_t comps, double d, double h) {
    CaseReport r;
    r.case_id = "c";
    r.components_after = comps;
    r.dice = d;
    r.hd95_mm = h;
    return r;
  };

  SUBCASE("empty input") {
    CHECK_THROWS_AS(component_trend({}), EmptyInput);
  }
  SUBCASE("single-component cases populate only group 1") {
    const TrendReport t = component_trend({mk(1, 0.8, 3.0), mk(1, 0.6, 5.0)});
    CHECK(t.groups.size() == 1);
    CHECK(t.groups.at("1").n == 2);
    CHECK(t.groups.at("1").mean_dice == doctest::Approx(0.7));
    CHECK(*t.groups.at("1").mean_hd95 == doctest::Approx(4.0));
    // constant component counts: correlations are degenerate
    CHECK_FALSE(t.pearson_dice.has_value());
  }
  SUBCASE("dice strictly decreasing with component count") {
    std::vector<CaseReport> cases;
    for (int c = 1; c <= 5; ++c)
      for (int rep = 0; rep < 3; ++rep)
        cases.push_back(mk(c, 1.0 - 0.1 * c - 0.01 * rep, 2.0 * c + 0.1 * rep));
    const TrendReport t = component_trend(cases);
    REQUIRE(t.pearson_dice.has_value());
    CHECK(t.pearson_dice->r < 0.0);
    CHECK(t.spearman_dice->r < 0.0);
    CHECK(t.pearson_hd95->r > 0.0);
    CHECK(t.spearman_hd95->r > 0.0);
    CHECK(t.groups.at("3+").n == 9);
  }
  SUBCASE("group means match hand computation and infinities are excluded") {
    const TrendReport t = component_trend({
        mk(1, 0.9, 2.0),
        mk(1, 0.7, std::numeric_limits<double>::infinity()),
        mk(2, 0.5, 6.0),
        mk(3, 0.4, 8.0),
        mk(4, 0.3, 10.0),
    });
    CHECK(t.groups.at("1").mean_dice == doctest::Approx(0.8));
    CHECK(*t.groups.at("1").mean_hd95 == doctest::Approx(2.0));  // inf excluded
    CHECK(t.groups.at("1").hd95_excluded == 1);
    CHECK(t.hd95_excluded == 1);
    CHECK(t.groups.at("2").mean_dice == doctest::Approx(0.5));
    CHECK(t.groups.at("3+").n == 2);
    CHECK(t.groups.at("3+").mean_dice == doctest::Approx(0.35));
  }
}
