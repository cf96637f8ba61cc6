#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "rbfim/rbfim_metric.hpp"

namespace rbfim {
namespace {

point_cloud gray(point_cloud c, std::uint8_t level) {
  c.colors = std::vector<rgb8>(c.positions.size(), rgb8{level, level, level});
  return c;
}

TEST(SelectReference, FullFractionIsEveryId) {
  std::vector<index_t> ids = select_reference(100, 1.0, 7);
  std::vector<index_t> want(100);
  std::iota(want.begin(), want.end(), index_t{0});
  EXPECT_EQ(ids, want);
}

TEST(SelectReference, HalfIsDeterministic) {
  std::vector<index_t> a = select_reference(100, 0.5, 0);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(std::set<index_t>(a.begin(), a.end()).size(), 50u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(select_reference(100, 0.5, 0), a);
  std::vector<index_t> b = select_reference(100, 0.5, 1);
  EXPECT_EQ(b.size(), 50u);
  EXPECT_NE(a, b);
}

TEST(SelectReference, RoundsUp) {
  EXPECT_EQ(select_reference(10, 0.01, 0).size(), 1u);
  EXPECT_EQ(select_reference(7, 0.5, 0).size(), 4u);
  EXPECT_THROW(select_reference(10, 0.0, 0), input_error);
  EXPECT_THROW(select_reference(10, 1.5, 0), input_error);
}

TEST(GridPool, SingleCell) {
  points3d pts{{1, 1, 1}, {500, 500, 500}, {1000, 20, 3}};
  std::vector<double> o{10, 20, 30};
  std::vector<double> d{10, 20, 36};
  pool_result r = grid_pool(pts, o, d, 1);
  EXPECT_EQ(r.m_r, 1);
  EXPECT_NEAR(r.distortion, 2.0, 1e-12);
}

TEST(GridPool, Identity) {
  points3d pts = testing::uniform_cloud(500, 1, 1024).positions;
  std::vector<double> v(500);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_EQ(grid_pool(pts, v, v, 16).distortion, 0.0);
}

TEST(GridPool, HandBinnedTwoCells) {
  points3d pts{{10, 10, 10}, {1000, 1000, 10}};
  std::vector<double> o{50, 50};
  std::vector<double> d{54, 44};
  pool_result r = grid_pool(pts, o, d, 2);
  EXPECT_EQ(r.m_r, 2);
  EXPECT_NEAR(r.distortion, 5.0, 1e-12);
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].cell, 0);
  EXPECT_EQ(r.cells[1].cell, (1 * 2 + 1) * 2 + 0);
}

TEST(GridPool, MeansBeforeDifference) {
  // diffs +6 and -6 in one cell cancel before taking the absolute value
  points3d pts{{10, 10, 10}, {20, 20, 20}};
  std::vector<double> o{100, 100};
  std::vector<double> d{106, 94};
  EXPECT_NEAR(grid_pool(pts, o, d, 4).distortion, 0.0, 1e-12);
}

TEST(GridPool, UpperFaceBelongsToLastCell) {
  points3d pts{{1024, 1024, 1024}};
  std::vector<double> o{0};
  std::vector<double> d{3};
  pool_result r = grid_pool(pts, o, d, 4);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].cell, 63);
}

TEST(Quality, FromDistortion) {
  EXPECT_NEAR(quality_from_distortion(255.0, 100.0), 0.0, 1e-12);
  EXPECT_NEAR(quality_from_distortion(2.55, 100.0), 40.0, 1e-12);
  EXPECT_EQ(quality_from_distortion(0.0, 100.0), 100.0);
  EXPECT_EQ(quality_from_distortion(1e-12, 100.0), 100.0);
  EXPECT_NEAR(quality_from_distortion(8.0, 100.0), 20.0 * std::log10(255.0 / 8.0), 1e-12);
}

TEST(ComputeRbfim, IdentityPair) {
  point_cloud c = testing::uniform_cloud(3000, 2);
  metric_report r = compute_rbfim(c, c, rbfim_config{});
  EXPECT_LE(r.d_rbfim, 1e-6);
  EXPECT_EQ(r.q_rbfim, 100.0);
  EXPECT_EQ(r.n_original, 3000);
  EXPECT_EQ(r.n_reference, 3000);
  EXPECT_GT(r.n_subdomains, 0);
}

TEST(ComputeRbfim, ConstantShift) {
  point_cloud c = testing::sphere_cloud(5000, 3);
  metric_report r = compute_rbfim(gray(c, 128), gray(c, 120), rbfim_config{});
  EXPECT_NEAR(r.d_rbfim, 8.0, 1e-3);
  EXPECT_NEAR(r.q_rbfim, 30.07, 0.01);
}

TEST(ComputeRbfim, DistortedPointOrderDoesNotMatter) {
  point_cloud c = testing::clustered_cloud(3000, 4);
  point_cloud d = testing::with_luma_shift(c, 3);
  for (rgb8& px : *d.colors) {
    px[1] = static_cast<std::uint8_t>(px[1] ^ 5);
  }
  std::vector<std::size_t> perm(d.positions.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  point_cloud shuffled;
  shuffled.colors.emplace();
  for (std::size_t p : perm) {
    shuffled.positions.push_back(d.positions[p]);
    shuffled.colors->push_back((*d.colors)[p]);
  }
  rbfim_config cfg;
  double a = compute_rbfim(c, d, cfg).d_rbfim;
  double b = compute_rbfim(c, shuffled, cfg).d_rbfim;
  EXPECT_NEAR(a, b, 1e-6);
}

TEST(ComputeRbfim, SingleCellIsMeanDifference) {
  point_cloud c = testing::uniform_cloud(2000, 5);
  point_cloud d = testing::with_luma_shift(c, 5);
  rbfim_config cfg;
  cfg.grid_scale = 1;
  metric_report r = compute_rbfim(c, d, cfg);
  EXPECT_EQ(r.m_r, 1);
  ASSERT_EQ(r.per_cell.size(), 1u);
  EXPECT_NEAR(r.d_rbfim, std::abs(r.per_cell[0].mean_distorted - r.per_cell[0].mean_original), 1e-12);
  EXPECT_NEAR(r.d_rbfim, 5.0, 1e-3);
}

TEST(ComputeRbfim, NoiseIncreasesDistortion) {
  point_cloud c = testing::sphere_cloud(8000, 6);
  double prev = -1.0;
  for (int sigma : {2, 4, 8, 16}) {
    point_cloud d = c;
    std::mt19937_64 rng(sigma);
    std::normal_distribution<double> g(0, sigma);
    for (rgb8& px : *d.colors) {
      int n = static_cast<int>(std::lround(g(rng)));
      for (auto& ch : px) {
        ch = static_cast<std::uint8_t>(std::clamp(int(ch) + n, 0, 255));
      }
    }
    double dist = compute_rbfim(c, d, rbfim_config{}).d_rbfim;
    EXPECT_GT(dist, prev) << "sigma " << sigma;
    prev = dist;
  }
}

TEST(ComputeRbfim, ThreadCountDoesNotChangeResult) {
  point_cloud c = testing::uniform_cloud(4000, 7);
  point_cloud d = testing::with_luma_shift(c, 2);
  rbfim_config one;
  rbfim_config four;
  four.threads = 4;
  EXPECT_EQ(compute_rbfim(c, d, one).d_rbfim, compute_rbfim(c, d, four).d_rbfim);
}

TEST(ComputeRbfim, TooFewDistortedPoints) {
  point_cloud c = testing::uniform_cloud(100, 8);
  point_cloud d;
  d.positions = {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  d.colors = std::vector<rgb8>(3, rgb8{1, 1, 1});
  EXPECT_THROW(compute_rbfim(c, d, rbfim_config{}), numeric_error);
}

TEST(ComputeRbfim, CurvatureFeatureRuns) {
  point_cloud c = testing::sphere_cloud(3000, 9);
  rbfim_config cfg;
  cfg.feature = feature_kind::curvature(12);
  metric_report r = compute_rbfim(c, c, cfg);
  EXPECT_LE(r.d_rbfim, 1e-6);
}

TEST(MergeSmall, EveryResultHasFiveMembers) {
  points3d pts = testing::clustered_cloud(3000, 10, 7, 1024.0).positions;
  spatial_index idx(pts);
  subdomain_set set = merge_small_subdomains(decompose(pts, idx, partition_config{}), idx, 5);
  std::vector<int> hits(pts.size(), 0);
  for (const subdomain& s : set.subdomains) {
    EXPECT_GE(s.size(), 5);
    EXPECT_EQ(s.member_ids, idx.within_radius(s.center, s.radius));
    for (index_t id : s.member_ids) {
      ++hits[id];
    }
  }
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 0), 0);
}

}  // namespace
}  // namespace rbfim
