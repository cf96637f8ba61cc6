#include "rbfim/baseline_metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

namespace rbfim {

namespace {

directional_error symmetrize(double d1, double d2, double peak_sq) {
  directional_error e;
  e.d1 = d1;
  e.d2 = d2;
  e.mse = std::max(d1, d2);
  e.psnr = psnr_from_mse(e.mse, peak_sq);
  return e;
}

void require_nonempty(const featured_cloud& a, const featured_cloud& b) {
  if (a.positions.empty() || b.positions.empty()) {
    throw input_error("baseline metrics need two non-empty clouds");
  }
}

// Mean over `from` of err(i, nearest point of `to`).
template <class Err>
double one_way(const featured_cloud& from, const spatial_index& to, Err&& err) {
  double sum = 0.0;
  for (index_t i = 0; i < from.size(); ++i) {
    sum += err(i, to.nearest(from.positions[i]).id);
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double psnr_from_mse(double mse, double peak_sq, double cap) {
  if (mse <= 0.0) {
    return cap;
  }
  return std::min(cap, 10.0 * std::log10(peak_sq / mse));
}

points3d estimate_normals(std::span<const point3d> positions, const spatial_index& index, int k) {
  if (static_cast<index_t>(positions.size()) <= k) {
    throw input_error("normal estimation needs more than k = " + std::to_string(k) + " points");
  }
  points3d normals(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto nbrs = index.k_nearest(positions[i], k);
    point3d mean = point3d::Zero();
    for (const neighbor& n : nbrs) {
      mean += positions[n.id];
    }
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const neighbor& n : nbrs) {
      point3d d = positions[n.id] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    normals[i] = es.eigenvectors().col(0).normalized();
  }
  return normals;
}

directional_error p2po(const featured_cloud& a, const featured_cloud& b) {
  require_nonempty(a, b);
  spatial_index ia(a.positions);
  spatial_index ib(b.positions);
  double d1 = one_way(a, ib, [&](index_t i, index_t j) { return squared_distance(a.positions[i], b.positions[j]); });
  double d2 = one_way(b, ia, [&](index_t i, index_t j) { return squared_distance(b.positions[i], a.positions[j]); });
  return symmetrize(d1, d2, 3.0 * kGeometryPeak * kGeometryPeak);
}

directional_error p2pl(const featured_cloud& a, const featured_cloud& b, int k) {
  require_nonempty(a, b);
  spatial_index ia(a.positions);
  spatial_index ib(b.positions);
  points3d na = estimate_normals(a.positions, ia, k);
  points3d nb = estimate_normals(b.positions, ib, k);
  auto projected = [](const point3d& p, const point3d& q, const point3d& normal) {
    double t = (p - q).dot(normal);
    return t * t;
  };
  double d1 = one_way(a, ib, [&](index_t i, index_t j) { return projected(a.positions[i], b.positions[j], nb[j]); });
  double d2 = one_way(b, ia, [&](index_t i, index_t j) { return projected(b.positions[i], a.positions[j], na[j]); });
  return symmetrize(d1, d2, 3.0 * kGeometryPeak * kGeometryPeak);
}

directional_error color_mse(const featured_cloud& a, const featured_cloud& b) {
  require_nonempty(a, b);
  if (a.features.size() != a.positions.size() || b.features.size() != b.positions.size()) {
    throw input_error("color_mse needs one channel value per point");
  }
  spatial_index ia(a.positions);
  spatial_index ib(b.positions);
  auto sq = [](double x) { return x * x; };
  double d1 = one_way(a, ib, [&](index_t i, index_t j) { return sq(a.features[i] - b.features[j]); });
  double d2 = one_way(b, ia, [&](index_t i, index_t j) { return sq(b.features[i] - a.features[j]); });
  return symmetrize(d1, d2, 255.0 * 255.0);
}

baseline_report compute_baselines(const point_cloud& original, const point_cloud& distorted, int normal_k) {
  original.validate();
  distorted.validate();
  norm_params params = compute_norm_params(original);
  auto normalize = [&](const point_cloud& c) {
    featured_cloud out;
    out.positions.reserve(c.positions.size());
    for (const point3d& p : c.positions) {
      out.positions.push_back(params.apply(p));
    }
    return out;
  };
  featured_cloud a = normalize(original);
  featured_cloud b = normalize(distorted);

  baseline_report r;
  r.p2po = p2po(a, b);
  r.p2pl = p2pl(a, b, normal_k);
  if (original.has_colors() && distorted.has_colors()) {
    auto channel = [&](feature_kind kind) {
      a.features = extract_feature(original, kind);
      b.features = extract_feature(distorted, kind);
      return color_mse(a, b);
    };
    r.y = channel(feature_kind::luminance());
    r.u = channel(feature_kind::chroma_u());
    r.v = channel(feature_kind::chroma_v());
  }
  return r;
}

point_cloud synth_distort(const point_cloud& cloud, double quant_step, double luma_sigma, std::uint64_t seed) {
  cloud.validate();
  if (!(quant_step >= 0.0) || !(luma_sigma >= 0.0)) {
    throw input_error("synth_distort: quant_step and luma_sigma must be non-negative");
  }
  point_cloud out;
  if (quant_step == 0.0) {
    out = cloud;
  } else {
    using key = std::array<std::int64_t, 3>;
    struct accum {
      std::size_t slot;
      std::array<double, 3> rgb_sum{};
      double count = 0.0;
    };
    std::map<key, accum> cells;
    std::vector<key> order;
    point3d origin = cloud.positions.front();
    for (const point3d& p : cloud.positions) {
      origin = origin.cwiseMin(p);
    }
    for (index_t i = 0; i < cloud.size(); ++i) {
      const point3d p = cloud.positions[i] - origin;
      key k{static_cast<std::int64_t>(std::floor(p(0) / quant_step)),
            static_cast<std::int64_t>(std::floor(p(1) / quant_step)),
            static_cast<std::int64_t>(std::floor(p(2) / quant_step))};
      auto [it, inserted] = cells.try_emplace(k, accum{order.size()});
      if (inserted) {
        order.push_back(k);
      }
      if (cloud.has_colors()) {
        for (int ch = 0; ch < 3; ++ch) {
          it->second.rgb_sum[ch] += (*cloud.colors)[i][ch];
        }
      }
      it->second.count += 1.0;
    }
    out.positions.reserve(order.size());
    if (cloud.has_colors()) {
      out.colors.emplace();
      out.colors->reserve(order.size());
    }
    for (const key& k : order) {
      const accum& a = cells.at(k);
      out.positions.push_back(origin + quant_step * point3d(double(k[0]) + 0.5, double(k[1]) + 0.5, double(k[2]) + 0.5));
      if (cloud.has_colors()) {
        rgb8 c;
        for (int ch = 0; ch < 3; ++ch) {
          c[ch] = static_cast<std::uint8_t>(std::clamp(std::round(a.rgb_sum[ch] / a.count), 0.0, 255.0));
        }
        out.colors->push_back(c);
      }
    }
  }

  if (luma_sigma > 0.0 && out.has_colors()) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, luma_sigma);
    for (rgb8& c : *out.colors) {
      double delta = noise(rng);
      for (auto& ch : c) {
        ch = static_cast<std::uint8_t>(std::clamp(std::round(double(ch) + delta), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace rbfim
