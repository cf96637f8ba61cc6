#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rbfim/partition.hpp"
#include "rbfim/pc_model.hpp"
#include "rbfim/pou_blend.hpp"
#include "rbfim/rbf_core.hpp"

namespace rbfim {

struct rbfim_config {
  kernel_kind kernel = kernel_kind::gaussian;
  partition_config partition;
  int grid_scale = 16;
  double ref_fraction = 1.0;
  std::uint64_t rng_seed = 0;
  feature_kind feature = feature_kind::luminance();
  double q_cap = 100.0;
  int threads = 1;

  void validate() const;
};

struct cell_means {
  std::int64_t cell;  // (ix * L + iy) * L + iz
  double mean_original;
  double mean_distorted;
  index_t count;
};

struct pool_result {
  double distortion = 0.0;
  std::vector<cell_means> cells;  // non-empty cells, ascending index
  index_t m_r = 0;
};

struct metric_report {
  double d_rbfim = 0.0;
  double q_rbfim = 0.0;
  index_t m_r = 0;
  std::vector<cell_means> per_cell;
  index_t n_subdomains = 0;
  index_t n_reference = 0;
  index_t n_original = 0;
  index_t n_distorted = 0;  // after duplicate merging
  std::map<std::string, index_t> solve_paths;
  std::map<std::string, double> timings;  // seconds per stage
  rbfim_config config;
};

std::vector<index_t> select_reference(index_t n_original, double fraction, std::uint64_t seed);

// Equal L x L x L cells over [0, 1024]^3; D = mean over non-empty cells of |mean_D - mean_O|.
pool_result grid_pool(std::span<const point3d> positions, std::span<const double> original_values,
                      std::span<const double> distorted_values, int grid_scale);

// 20 log10(255 / D), capped at q_cap (and equal to it for D = 0).
double quality_from_distortion(double distortion, double q_cap);

// Folds subdomains with fewer than `min_members` members into the subdomain with the nearest
// center, growing that one's radius to reach the folded points. Returns the new set.
subdomain_set merge_small_subdomains(subdomain_set set, const spatial_index& index, index_t min_members);

metric_report compute_rbfim(const point_cloud& original, const point_cloud& distorted, const rbfim_config& cfg);

}  // namespace rbfim
