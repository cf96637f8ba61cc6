#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rbfim/types.hpp"

namespace rbfim {

using rgb8 = std::array<std::uint8_t, 3>;

struct point_cloud {
  points3d positions;
  std::optional<std::vector<rgb8>> colors;

  index_t size() const { return static_cast<index_t>(positions.size()); }
  bool has_colors() const { return colors.has_value(); }

  // Throws input_error if the cloud is empty or colors are misaligned.
  void validate() const;
};

// Affine map p -> 1024 * (p - p_min) / l_max, fixed by the original cloud.
struct norm_params {
  point3d p_min = point3d::Zero();
  double l_max = 1.0;

  point3d apply(const point3d& p) const { return kNormalizedExtent * (p - p_min) / l_max; }
};

enum class feature_type { luminance, chroma_u, chroma_v, curvature };

struct feature_kind {
  feature_type type = feature_type::luminance;
  int curvature_k = 12;  // only read for curvature

  static feature_kind luminance() { return {feature_type::luminance, 12}; }
  static feature_kind chroma_u() { return {feature_type::chroma_u, 12}; }
  static feature_kind chroma_v() { return {feature_type::chroma_v, 12}; }
  static feature_kind curvature(int k) { return {feature_type::curvature, k}; }

  bool needs_colors() const { return type != feature_type::curvature; }
};

std::string to_string(feature_kind kind);
// Accepts luma|cb|cr|curvature; curvature_k fills the neighbor count.
feature_kind parse_feature(const std::string& name, int curvature_k = 12);

struct featured_cloud {
  points3d positions;
  std::vector<double> features;

  index_t size() const { return static_cast<index_t>(positions.size()); }
};

// BT.709 full-range conversion. Chroma is offset to 128 and clamped to [0, 255].
struct ycbcr {
  double y;
  double cb;
  double cr;
};
ycbcr rgb_to_ycbcr(const rgb8& c);

point_cloud load_ply(const std::filesystem::path& path);

enum class ply_format { ascii, binary_little_endian };

// Writes x,y,z as float64 plus optional uchar red,green,blue.
void write_ply(const std::filesystem::path& path, const point_cloud& cloud,
               ply_format format = ply_format::binary_little_endian);

norm_params compute_norm_params(const point_cloud& original);

std::vector<double> extract_feature(const point_cloud& cloud, feature_kind kind);

// Curvature = lambda_min / (lambda_0 + lambda_1 + lambda_2) of the k-NN covariance, times 255.
std::vector<double> curvature_feature(std::span<const point3d> positions, int k);

std::tuple<featured_cloud, featured_cloud, norm_params> normalize_pair(const point_cloud& original,
                                                                       const point_cloud& distorted,
                                                                       feature_kind kind);

// Collapses exactly coincident positions into one point carrying the mean feature.
// The first occurrence's position order is kept.
featured_cloud merge_duplicates(const featured_cloud& cloud);

}  // namespace rbfim
