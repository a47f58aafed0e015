#include <gtest/gtest.h>

#include <cmath>

#include "bginv/resample.hpp"
#include "test_util.hpp"

namespace bginv {
namespace {

PointCloud cloud_of(std::vector<CloudPoint> pts, double d_max) {
  PointCloud pc;
  pc.model_id = "m";
  pc.position = "p";
  pc.d_max = d_max;
  pc.points = std::move(pts);
  return pc;
}

// Mirror-paired random cloud with continuous or discrete distances. A pair
// never sits on the diagonal: a point and its own mirror at the same place
// tie everywhere, and a K-th cut through such a pair cannot be antisymmetric.
PointCloud random_antisymmetric(std::uint64_t seed, std::size_t pairs, bool discrete) {
  Rng rng(seed);
  std::vector<CloudPoint> pts;
  auto coord = [&] { return discrete ? 0.5 * static_cast<double>(rng.below(11)) : rng.uniform(0.0, 5.0); };
  for (std::size_t i = 0; i < pairs; ++i) {
    double a = coord(), b = coord();
    while (a == b) b = coord();
    const double v = rng.uniform(-1.0, 1.0);
    pts.push_back({a, b, v});
    pts.push_back({b, a, -v});
  }
  return cloud_of(std::move(pts), 5.0);
}

PointCloud random_cloud(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<CloudPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0), rng.normal()});
  return cloud_of(std::move(pts), 4.0);
}

TEST(RbfConfig, Validation) {
  RbfConfig c;
  EXPECT_NO_THROW(c.validate());
  c.r = 1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.sigma = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.radius = -1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.k = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(GridIndex, RoundsAndClamps) {
  EXPECT_EQ(grid_index(0.0, 4.0, 32), 0u);
  EXPECT_EQ(grid_index(4.0, 4.0, 32), 31u);
  EXPECT_EQ(grid_index(2.0, 4.0, 32), 16u);  // 15.5 rounds away from zero
  EXPECT_EQ(grid_index(9.0, 4.0, 32), 31u);
}

TEST(Knn, SinglePointEverywhere) {
  const auto pc = cloud_of({{1.0, 2.0, 5.0}}, 4.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(knn_value(pc, 8, i, j, 1), 5.0);
}

TEST(Knn, ExhaustionGivesGlobalMean) {
  const auto pc = random_cloud(1, 17);
  double mean = 0.0;
  for (const auto& p : pc.points) mean += p.v;
  mean /= 17.0;
  EXPECT_NEAR(knn_value(pc, 16, 3, 9, 17), mean, 1e-12);
  EXPECT_NEAR(knn_value(pc, 16, 15, 0, 100), mean, 1e-12);
}

TEST(Knn, TiesGoToLowerIndex) {
  // Both points at distance 1 from element (1, 1) on a 3x3 grid with d_max 2.
  const auto pc = cloud_of({{2.0, 1.0, 1.0}, {0.0, 1.0, 3.0}}, 2.0);
  EXPECT_EQ(knn_value(pc, 3, 1, 1, 1), 1.0);
  const auto swapped = cloud_of({{0.0, 1.0, 3.0}, {2.0, 1.0, 1.0}}, 2.0);
  EXPECT_EQ(knn_value(swapped, 3, 1, 1, 1), 3.0);
}

TEST(Knn, GridSearchMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pc = random_cloud(seed, 50 + 90 * seed);
    for (std::size_t r : {2u, 7u, 32u}) {
      const auto pts = to_grid(pc, r);
      const PointGrid grid(pts, r);
      for (std::size_t k : {1u, 2u, 5u, 32u, 1000u})
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < r; ++j)
            ASSERT_EQ(grid.knn_value(i, j, k), knn_value_bruteforce(pts, i, j, k)) << seed << " " << r << " " << k;
    }
  }
}

TEST(Knn, GridSearchMatchesBruteForceWithTies) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pc = random_antisymmetric(seed, 100, true);
    const auto pts = to_grid(pc, 11);
    const PointGrid grid(pts, 11);
    for (std::size_t k : {1u, 3u, 8u, 32u})
      for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 11; ++j) ASSERT_EQ(grid.knn_value(i, j, k), knn_value_bruteforce(pts, i, j, k));
  }
}

TEST(Knn, EmptyCloudIsError) {
  EXPECT_THROW(knn_value(cloud_of({}, 1.0), 4, 0, 0, 1), Error);
}

TEST(Interpolate, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pc = random_cloud(seed, 100 * seed);
    for (const RbfConfig cfg : {RbfConfig{}, RbfConfig{16, 4.0, 2.0, 5}, RbfConfig{9, 1.5, 0.7, 1}}) {
      const auto fast = interpolate(pc, cfg);
      const auto slow = interpolate_bruteforce(pc, cfg);
      ASSERT_EQ(fast.values.size(), cfg.r * cfg.r);
      for (std::size_t n = 0; n < fast.values.size(); ++n) ASSERT_NEAR(fast.values[n], slow.values[n], 1e-9);
    }
  }
}

TEST(Interpolate, ConstantCloudGivesConstantMatrix) {
  for (const double c : {0.25, 0.1, -1.0 / 3.0, 7e-5}) {
    Rng rng(4);
    std::vector<CloudPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({rng.uniform(0, 3), rng.uniform(0, 3), c});
    const auto pc = cloud_of(pts, 3.0);
    for (const auto& m : {interpolate(pc, {}), interpolate_bruteforce(pc, {}), interpolate(pc, {12, 1.0, 0.5, 3})})
      for (double v : m.values) ASSERT_EQ(v, c);
  }
}

TEST(Interpolate, AntisymmetricCloudGivesAntisymmetricMatrix) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (bool discrete : {false, true}) {
      const auto pc = random_antisymmetric(seed, 150, discrete);
      for (const RbfConfig cfg : {RbfConfig{}, RbfConfig{16, 3.0, 1.5, 4}}) {
        const auto m = interpolate(pc, cfg);
        for (std::size_t i = 0; i < cfg.r; ++i)
          for (std::size_t j = 0; j < cfg.r; ++j) ASSERT_NEAR(m.at(i, j), -m.at(j, i), 1e-6) << seed << discrete;
      }
    }
  }
}

TEST(Interpolate, StaysWithinValueRange) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pc = random_cloud(seed, 80);
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pc.points) {
      lo = std::min(lo, p.v);
      hi = std::max(hi, p.v);
    }
    for (double v : interpolate(pc, {20, 3.0, 2.0, 6}).values) {
      EXPECT_GE(v, lo - 1e-12);
      EXPECT_LE(v, hi + 1e-12);
    }
  }
}

TEST(Interpolate, PointAtElementCenterWithK1) {
  // One point exactly at grid element (3, 3) of an 8x8 grid.
  const auto pc = cloud_of({{3.0, 3.0, 0.8}}, 7.0);
  const auto m = interpolate(pc, {8, 2.0, 1.0, 1});
  EXPECT_DOUBLE_EQ(m.at(3, 3), 0.8);
}

TEST(Interpolate, EmptyCircleStillDefined) {
  const auto pc = cloud_of({{0.0, 0.0, 1.0}, {0.0, 0.0, 3.0}}, 10.0);
  const RbfConfig cfg{11, 1.0, 1.0, 2};
  const auto m = interpolate(pc, cfg);
  EXPECT_DOUBLE_EQ(m.at(10, 10), 2.0);
  EXPECT_TRUE(std::isnan(interpolate_bruteforce(pc, cfg, false).at(10, 10)));
  for (double v : m.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Interpolate, Errors) {
  EXPECT_THROW(interpolate(cloud_of({}, 1.0), {}), Error);
  EXPECT_THROW(interpolate(cloud_of({{0, 0, 1}}, 0.0), {}), Error);
}

TEST(MatrixJson, RoundTrip) {
  const auto m = interpolate(random_cloud(2, 40), {8, 3.0, 1.0, 4});
  const auto back = matrix_from_json(json::parse(matrix_to_json(m).dump()));
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.r, 8u);
  json bad = matrix_to_json(m);
  bad["values"].erase(0);
  EXPECT_THROW(matrix_from_json(bad), Error);
}

TEST(Render, SizesAndColors) {
  VarianceMatrix zero{"m", "p", 32, 1.0, std::vector<double>(32 * 32, 0.0)};
  const Image img = render_matrix(zero, 8);
  EXPECT_EQ(img.width, 256u);
  EXPECT_EQ(img.height, 256u);
  for (const auto& px : img.pixels) EXPECT_EQ(px, colors::kWhite);
  const std::string ppm = img.to_ppm();
  EXPECT_EQ(ppm.rfind("P6\n256 256\n255\n", 0), 0u);
  EXPECT_EQ(ppm.size(), std::string("P6\n256 256\n255\n").size() + 256u * 256u * 3u);

  VarianceMatrix m{"m", "p", 2, 1.0, {-1.0, 0.0, 0.5, 1.0}};
  const Image c = render_matrix(m, 1);
  EXPECT_EQ(c.pixels[0], colors::kGreen);
  EXPECT_EQ(c.pixels[1], colors::kWhite);
  EXPECT_EQ(c.pixels[2], colors::kYellow);
  EXPECT_EQ(c.pixels[3], colors::kRed);

  VarianceMatrix scaled{"m", "p", 2, 1.0, {-2.0, 0.0, 0.0, 1.0}};
  const Image s = render_matrix(scaled, 1);
  EXPECT_EQ(s.pixels[0], colors::kGreen);
  EXPECT_EQ(s.pixels[3], colors::kYellow);

  VarianceMatrix nan{"m", "p", 2, 1.0, {std::nan(""), 0, 0, 0}};
  EXPECT_THROW(render_matrix(nan, 1), Error);
  EXPECT_THROW(render_matrix(zero, 0), Error);
}

TEST(Render, ScatterMarksPoints) {
  const auto pc = cloud_of({{0.0, 0.0, 0.0}, {4.0, 0.0, 1.0}}, 4.0);
  const Image img = render_scatter(pc, 5);
  EXPECT_EQ(img.pixels[0], (Rgb{128, 128, 128}));
  EXPECT_EQ(img.pixels[4 * 5], colors::kRed);
  EXPECT_EQ(img.pixels[1], colors::kWhite);
}

}  // namespace
}  // namespace bginv
