#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "rbfim/pc_model.hpp"
#include "rbfim/spatial_index.hpp"

namespace rbfim {

inline constexpr double kPsnrCap = 100.0;
inline constexpr double kGeometryPeak = 1023.0;

// d1: mean error over a against nearest points of b; d2: b against a. mse = max(d1, d2).
struct directional_error {
  double d1 = 0.0;
  double d2 = 0.0;
  double mse = 0.0;
  double psnr = kPsnrCap;
};

struct baseline_report {
  directional_error p2po;
  directional_error p2pl;
  std::optional<directional_error> y;
  std::optional<directional_error> u;
  std::optional<directional_error> v;
};

// 10 log10(peak_sq / mse), capped.
double psnr_from_mse(double mse, double peak_sq, double cap = kPsnrCap);

// Unit PCA normals from the k nearest neighbors (the point itself included).
points3d estimate_normals(std::span<const point3d> positions, const spatial_index& index, int k);

directional_error p2po(const featured_cloud& a, const featured_cloud& b);
directional_error p2pl(const featured_cloud& a, const featured_cloud& b, int k = 12);
// Uses the per-point feature as the channel value.
directional_error color_mse(const featured_cloud& a, const featured_cloud& b);

// All baselines in the original cloud's normalized frame. Color entries need colors on both sides.
baseline_report compute_baselines(const point_cloud& original, const point_cloud& distorted, int normal_k = 12);

// Stand-in for codec distortion: snap positions to a quant_step lattice (merging points that
// share a lattice cell and averaging their colors), then add Gaussian noise of std luma_sigma
// equally to R, G and B, which shifts luminance only.
point_cloud synth_distort(const point_cloud& cloud, double quant_step, double luma_sigma, std::uint64_t seed);

}  // namespace rbfim
