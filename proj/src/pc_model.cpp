#include "rbfim/pc_model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "rbfim/spatial_index.hpp"

namespace rbfim {

void point_cloud::validate() const {
  if (positions.empty()) {
    throw input_error("point cloud has no points");
  }
  if (colors && colors->size() != positions.size()) {
    throw input_error("point cloud color count does not match point count");
  }
  for (const point3d& p : positions) {
    if (!p.allFinite()) {
      throw input_error("point cloud contains a non-finite coordinate");
    }
  }
}

std::string to_string(feature_kind kind) {
  switch (kind.type) {
    case feature_type::luminance:
      return "luma";
    case feature_type::chroma_u:
      return "cb";
    case feature_type::chroma_v:
      return "cr";
    case feature_type::curvature:
      return "curvature";
  }
  return "?";
}

feature_kind parse_feature(const std::string& name, int curvature_k) {
  if (name == "luma" || name == "luminance" || name == "y") {
    return feature_kind::luminance();
  }
  if (name == "cb" || name == "u") {
    return feature_kind::chroma_u();
  }
  if (name == "cr" || name == "v") {
    return feature_kind::chroma_v();
  }
  if (name == "curvature") {
    if (curvature_k < 3) {
      throw input_error("curvature needs at least 3 neighbors");
    }
    return feature_kind::curvature(curvature_k);
  }
  throw input_error("unknown feature '" + name + "'");
}

ycbcr rgb_to_ycbcr(const rgb8& c) {
  double r = c[0];
  double g = c[1];
  double b = c[2];
  double y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
  double cb = std::clamp((b - y) / 1.8556 + 128.0, 0.0, 255.0);
  double cr = std::clamp((r - y) / 1.5748 + 128.0, 0.0, 255.0);
  return {std::clamp(y, 0.0, 255.0), cb, cr};
}

norm_params compute_norm_params(const point_cloud& original) {
  original.validate();
  point3d lo = original.positions.front();
  point3d hi = lo;
  for (const point3d& p : original.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double l_max = (hi - lo).maxCoeff();
  if (!(l_max > 0.0)) {
    throw input_error("degenerate bounding box: all points of the original cloud coincide");
  }
  return {lo, l_max};
}

std::vector<double> curvature_feature(std::span<const point3d> positions, int k) {
  if (k < 3) {
    throw input_error("curvature needs at least 3 neighbors");
  }
  if (static_cast<index_t>(positions.size()) <= k) {
    throw input_error("curvature needs more than k = " + std::to_string(k) + " points");
  }
  spatial_index index(positions);
  std::vector<double> out(positions.size());
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
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov, Eigen::EigenvaluesOnly);
    Eigen::Vector3d lambda = es.eigenvalues().cwiseMax(0.0);
    double total = lambda.sum();
    out[i] = total > 0.0 ? 255.0 * lambda(0) / total : 0.0;
  }
  return out;
}

std::vector<double> extract_feature(const point_cloud& cloud, feature_kind kind) {
  if (kind.type == feature_type::curvature) {
    return curvature_feature(cloud.positions, kind.curvature_k);
  }
  if (!cloud.has_colors()) {
    throw input_error("feature '" + to_string(kind) + "' requires per-point colors");
  }
  std::vector<double> out;
  out.reserve(cloud.positions.size());
  for (const rgb8& c : *cloud.colors) {
    ycbcr v = rgb_to_ycbcr(c);
    switch (kind.type) {
      case feature_type::luminance:
        out.push_back(v.y);
        break;
      case feature_type::chroma_u:
        out.push_back(v.cb);
        break;
      default:
        out.push_back(v.cr);
        break;
    }
  }
  return out;
}

std::tuple<featured_cloud, featured_cloud, norm_params> normalize_pair(const point_cloud& original,
                                                                       const point_cloud& distorted,
                                                                       feature_kind kind) {
  distorted.validate();
  norm_params params = compute_norm_params(original);

  auto normalize = [&](const point_cloud& cloud) {
    featured_cloud out;
    out.positions.reserve(cloud.positions.size());
    for (const point3d& p : cloud.positions) {
      out.positions.push_back(params.apply(p));
    }
    if (kind.type == feature_type::curvature) {
      out.features = curvature_feature(out.positions, kind.curvature_k);
    } else {
      out.features = extract_feature(cloud, kind);
    }
    return out;
  };
  return {normalize(original), normalize(distorted), params};
}

featured_cloud merge_duplicates(const featured_cloud& cloud) {
  const index_t n = cloud.size();
  std::vector<index_t> order(n);
  std::iota(order.begin(), order.end(), index_t{0});
  auto lex_less = [&](index_t a, index_t b) {
    const point3d& pa = cloud.positions[a];
    const point3d& pb = cloud.positions[b];
    for (int i = 0; i < 3; ++i) {
      if (pa(i) != pb(i)) {
        return pa(i) < pb(i);
      }
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex_less);

  // representative (first occurrence) for every point
  std::vector<index_t> rep(n);
  for (index_t i = 0; i < n;) {
    index_t j = i;
    while (j < n && cloud.positions[order[j]] == cloud.positions[order[i]]) {
      rep[order[j]] = order[i];
      ++j;
    }
    i = j;
  }

  std::vector<index_t> slot(n, -1);
  std::vector<double> counts;
  featured_cloud out;
  for (index_t i = 0; i < n; ++i) {
    index_t r = rep[i];
    if (slot[r] < 0) {
      slot[r] = out.size();
      out.positions.push_back(cloud.positions[r]);
      out.features.push_back(0.0);
      counts.push_back(0.0);
    }
    out.features[slot[r]] += cloud.features[i];
    counts[slot[r]] += 1.0;
  }
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    out.features[i] /= counts[i];
  }
  return out;
}

}  // namespace rbfim
