#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "rbfim/baseline_metrics.hpp"

namespace rbfim {
namespace {

featured_cloud random_featured(int n, std::uint64_t seed) {
  point_cloud c = testing::uniform_cloud(n, seed, 1024.0);
  featured_cloud f;
  f.positions = c.positions;
  for (const rgb8& px : *c.colors) {
    f.features.push_back(px[0]);
  }
  return f;
}

index_t brute_nearest(const points3d& pts, const point3d& q) {
  index_t best = 0;
  for (index_t j = 1; j < static_cast<index_t>(pts.size()); ++j) {
    if (squared_distance(pts[j], q) < squared_distance(pts[best], q)) {
      best = j;
    }
  }
  return best;
}

point3d brute_normal(const points3d& pts, index_t i, int k) {
  std::vector<std::pair<double, index_t>> d;
  for (index_t j = 0; j < static_cast<index_t>(pts.size()); ++j) {
    d.push_back({(pts[j] - pts[i]).norm(), j});
  }
  std::sort(d.begin(), d.end());
  point3d m = point3d::Zero();
  for (int t = 0; t < k; ++t) {
    m += pts[d[t].second];
  }
  m /= double(k);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int t = 0; t < k; ++t) {
    point3d e = pts[d[t].second] - m;
    cov += e * e.transpose();
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors().col(0).normalized();
}

enum class kind { point, plane, color };

double brute_one_way(const featured_cloud& a, const featured_cloud& b, kind what) {
  double sum = 0.0;
  for (index_t i = 0; i < a.size(); ++i) {
    index_t j = brute_nearest(b.positions, a.positions[i]);
    switch (what) {
      case kind::point:
        sum += squared_distance(a.positions[i], b.positions[j]);
        break;
      case kind::plane: {
        double t = (a.positions[i] - b.positions[j]).dot(brute_normal(b.positions, j, 12));
        sum += t * t;
        break;
      }
      case kind::color:
        sum += std::pow(a.features[i] - b.features[j], 2);
        break;
    }
  }
  return sum / double(a.size());
}

TEST(Psnr, FromMse) {
  EXPECT_EQ(psnr_from_mse(0.0, 255.0 * 255.0), kPsnrCap);
  EXPECT_NEAR(psnr_from_mse(100.0, 255.0 * 255.0), 28.1308036, 1e-6);
}

TEST(P2po, ThreeFourFive) {
  featured_cloud a{{{0, 0, 0}}, {0}};
  featured_cloud b{{{3, 4, 0}}, {0}};
  directional_error e = p2po(a, b);
  EXPECT_EQ(e.d1, 25.0);
  EXPECT_EQ(e.d2, 25.0);
  EXPECT_EQ(e.mse, 25.0);
  EXPECT_NEAR(e.psnr, 10 * std::log10(3 * 1023.0 * 1023.0 / 25.0), 1e-12);
}

TEST(P2po, IdentityIsCapped) {
  featured_cloud a = random_featured(200, 1);
  directional_error e = p2po(a, a);
  EXPECT_EQ(e.mse, 0.0);
  EXPECT_EQ(e.psnr, kPsnrCap);
}

TEST(P2po, MatchesBruteForce) {
  featured_cloud a = random_featured(300, 2);
  featured_cloud b = random_featured(250, 3);
  directional_error e = p2po(a, b);
  EXPECT_NEAR(e.d1, brute_one_way(a, b, kind::point), 1e-12 * e.d1);
  EXPECT_NEAR(e.d2, brute_one_way(b, a, kind::point), 1e-12 * e.d2);
}

TEST(P2pl, MatchesBruteForce) {
  featured_cloud a = random_featured(300, 4);
  featured_cloud b = random_featured(280, 5);
  directional_error e = p2pl(a, b);
  EXPECT_NEAR(e.d1, brute_one_way(a, b, kind::plane), 1e-12 * e.d1);
  EXPECT_NEAR(e.d2, brute_one_way(b, a, kind::plane), 1e-12 * e.d2);
  EXPECT_EQ(e.mse, std::max(e.d1, e.d2));
}

featured_cloud grid_plane(double dx, double dz) {
  featured_cloud f;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      f.positions.emplace_back(10.0 * i + dx, 10.0 * j, 100.0 + dz);
      f.features.push_back(0);
    }
  }
  return f;
}

TEST(P2pl, NormalOffset) {
  const double h = 0.75;
  directional_error e = p2pl(grid_plane(0, 0), grid_plane(0, h));
  EXPECT_NEAR(e.mse, h * h, 1e-12);
  EXPECT_NEAR(p2pl(grid_plane(0, 0), grid_plane(0, 0)).mse, 0.0, 1e-20);
}

TEST(P2pl, TangentOffsetIsInvisible) {
  directional_error e = p2pl(grid_plane(0, 0), grid_plane(2.5, 0));
  EXPECT_LE(e.mse, 1e-10);
  EXPECT_NEAR(p2po(grid_plane(0, 0), grid_plane(2.5, 0)).mse, 6.25, 1e-9);
}

TEST(ColorMse, LumaShift) {
  featured_cloud a = random_featured(200, 6);
  featured_cloud b = a;
  for (double& v : b.features) {
    v += 10.0;
  }
  directional_error e = color_mse(a, b);
  EXPECT_NEAR(e.mse, 100.0, 1e-12);
  EXPECT_NEAR(e.psnr, 28.13, 0.005);
  EXPECT_EQ(color_mse(a, a).psnr, kPsnrCap);
}

TEST(ColorMse, MatchesBruteForce) {
  featured_cloud a = random_featured(300, 7);
  featured_cloud b = random_featured(300, 8);
  directional_error e = color_mse(a, b);
  EXPECT_NEAR(e.d1, brute_one_way(a, b, kind::color), 1e-12 * e.d1);
  EXPECT_NEAR(e.d2, brute_one_way(b, a, kind::color), 1e-12 * e.d2);
}

TEST(ComputeBaselines, ReportsEveryChannel) {
  point_cloud c = testing::uniform_cloud(500, 9);
  baseline_report r = compute_baselines(c, testing::with_luma_shift(c, 10));
  EXPECT_EQ(r.p2po.mse, 0.0);
  ASSERT_TRUE(r.y && r.u && r.v);
  EXPECT_NEAR(r.y->mse, 100.0, 1e-9);
  EXPECT_NEAR(r.u->mse, 0.0, 1e-9);
  point_cloud bare;
  bare.positions = c.positions;
  EXPECT_FALSE(compute_baselines(bare, bare).y);
}

TEST(SynthDistort, NoOp) {
  point_cloud c = testing::uniform_cloud(400, 10);
  point_cloud d = synth_distort(c, 0.0, 0.0, 3);
  EXPECT_EQ(d.positions, c.positions);
  EXPECT_EQ(*d.colors, *c.colors);
}

TEST(SynthDistort, HugeStepCollapses) {
  point_cloud c = testing::uniform_cloud(400, 11);
  EXPECT_EQ(synth_distort(c, 1e6, 0.0, 0).size(), 1);
}

TEST(SynthDistort, FinerStepKeepsMorePoints) {
  point_cloud c = testing::sphere_cloud(5000, 12);
  index_t prev = 0;
  for (double step : {64.0, 32.0, 16.0, 8.0, 4.0, 2.0, 1.0, 0.5}) {
    index_t n = synth_distort(c, step, 0.0, 0).size();
    EXPECT_GE(n, prev) << "step " << step;
    prev = n;
  }
}

TEST(SynthDistort, NoiseOnlyMovesLuma) {
  point_cloud c = testing::uniform_cloud(1000, 13);
  point_cloud d = synth_distort(c, 0.0, 4.0, 5);
  EXPECT_EQ(d.positions, c.positions);
  int changed = 0;
  for (std::size_t i = 0; i < c.positions.size(); ++i) {
    const rgb8& a = (*c.colors)[i];
    const rgb8& b = (*d.colors)[i];
    changed += a != b;
    // equal shift on every channel, away from the clamping bounds
    EXPECT_EQ(int(b[0]) - int(a[0]), int(b[1]) - int(a[1]));
    EXPECT_EQ(int(b[1]) - int(a[1]), int(b[2]) - int(a[2]));
  }
  EXPECT_GT(changed, 500);
  EXPECT_EQ(*synth_distort(c, 0.0, 4.0, 5).colors, *d.colors);
  EXPECT_NE(*synth_distort(c, 0.0, 4.0, 6).colors, *d.colors);
}

TEST(SynthDistort, RejectsNegative) {
  point_cloud c = testing::uniform_cloud(10, 14);
  EXPECT_THROW(synth_distort(c, -1.0, 0.0, 0), input_error);
}

}  // namespace
}  // namespace rbfim
