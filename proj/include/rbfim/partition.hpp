#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbfim/pc_model.hpp"
#include "rbfim/spatial_index.hpp"

namespace rbfim {

struct partition_config {
  int t_min = 20;
  int t_max = 40;
  double eps0 = 0.01;
  int min_forced_level = 4;
  double growth_factor = 1.1;
  double shrink_factor = 0.9;
  int max_adjust_iters = 64;
  // Cells at this depth are accepted whatever their count or error.
  int max_level = 20;

  void validate() const;
};

enum class subdomain_flag : std::uint8_t {
  ok,
  undersized,  // radius adjustment gave up below t_min
  oversized,   // accepted above t_max (flat enough, depth limit, or unresolvable radius)
  repair,      // added afterwards around a point no octree cell reached
};

struct subdomain {
  point3d center = point3d::Zero();
  double radius = 0.0;
  std::vector<index_t> member_ids;  // ascending; exactly the points strictly inside the ball
  int level = 0;                    // -1 for repair subdomains
  std::uint64_t cell = 0;           // linear cell index at `level`
  double taubin_eps = 0.0;
  subdomain_flag flag = subdomain_flag::ok;

  index_t size() const { return static_cast<index_t>(member_ids.size()); }
};

struct subdomain_set {
  std::vector<subdomain> subdomains;

  index_t size() const { return static_cast<index_t>(subdomains.size()); }
};

// Max distance of the points to their least-squares plane, divided by radius.
// Zero for fewer than 3 points.
double taubin_error(std::span<const point3d> points, double radius);

// Adaptive octree over [0, 1024]^3. Output is sorted by (level, cell) with repair
// subdomains last in ascending point order, so it does not depend on `threads`.
subdomain_set decompose(std::span<const point3d> positions, const spatial_index& index,
                        const partition_config& cfg, int threads = 1);

}  // namespace rbfim
