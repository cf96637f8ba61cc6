#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rbfim/types.hpp"

namespace rbfim {

struct neighbor {
  index_t id;
  double distance;
};

// Static kd-tree over a point sequence. Ids refer to positions in the source sequence.
class spatial_index {
 public:
  explicit spatial_index(std::span<const point3d> points);

  index_t size() const { return static_cast<index_t>(points_.size()); }
  const point3d& point(index_t id) const { return points_[id]; }

  // Closest point; equal distances resolve to the lowest id.
  neighbor nearest(const point3d& q) const;

  // The k closest points ordered by (distance, id). k is clamped to size().
  std::vector<neighbor> k_nearest(const point3d& q, index_t k) const;

  // Ids with distance strictly less than radius, ascending.
  std::vector<index_t> within_radius(const point3d& c, double radius) const;

 private:
  struct node {
    // Leaves have axis == -1 and own ids_[begin, end).
    int axis = -1;
    double split = 0.0;
    index_t begin = 0;
    index_t end = 0;
    index_t left = -1;
    index_t right = -1;
  };

  index_t build(index_t begin, index_t end);

  points3d points_;
  std::vector<index_t> ids_;
  std::vector<node> nodes_;
  index_t root_ = -1;
};

}  // namespace rbfim
