#include "rbfim/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace rbfim {

namespace {

constexpr index_t kLeafSize = 12;

bool closer(double d2_a, index_t id_a, double d2_b, index_t id_b) {
  return d2_a < d2_b || (d2_a == d2_b && id_a < id_b);
}

struct heap_entry {
  double d2;
  index_t id;
  bool operator<(const heap_entry& other) const { return closer(d2, id, other.d2, other.id); }
};

}  // namespace

spatial_index::spatial_index(std::span<const point3d> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) {
    throw input_error("spatial_index: cannot build over an empty point set");
  }
  ids_.resize(points_.size());
  std::iota(ids_.begin(), ids_.end(), index_t{0});
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, size());
}

index_t spatial_index::build(index_t begin, index_t end) {
  index_t self = static_cast<index_t>(nodes_.size());
  nodes_.push_back(node{-1, 0.0, begin, end, -1, -1});
  if (end - begin <= kLeafSize) {
    return self;
  }

  point3d lo = points_[ids_[begin]];
  point3d hi = lo;
  for (index_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[ids_[i]]);
    hi = hi.cwiseMax(points_[ids_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi(axis) == lo(axis)) {
    return self;  // all coincident
  }

  index_t mid = begin + (end - begin) / 2;
  auto first = ids_.begin() + begin;
  std::nth_element(first, ids_.begin() + mid, ids_.begin() + end, [&](index_t a, index_t b) {
    double ca = points_[a](axis);
    double cb = points_[b](axis);
    return ca < cb || (ca == cb && a < b);
  });

  double split = points_[ids_[mid]](axis);
  index_t left = build(begin, mid);
  index_t right = build(mid, end);
  nodes_[self].axis = axis;
  nodes_[self].split = split;
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

neighbor spatial_index::nearest(const point3d& q) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  index_t best_id = -1;

  auto visit = [&](auto&& self, index_t n) -> void {
    const node& nd = nodes_[n];
    if (nd.axis < 0) {
      for (index_t i = nd.begin; i < nd.end; ++i) {
        index_t id = ids_[i];
        double d2 = squared_distance(q, points_[id]);
        if (closer(d2, id, best_d2, best_id)) {
          best_d2 = d2;
          best_id = id;
        }
      }
      return;
    }
    double diff = q(nd.axis) - nd.split;
    index_t near_child = diff < 0.0 ? nd.left : nd.right;
    index_t far_child = diff < 0.0 ? nd.right : nd.left;
    self(self, near_child);
    if (diff * diff <= best_d2) {
      self(self, far_child);
    }
  };
  visit(visit, root_);
  return {best_id, std::sqrt(best_d2)};
}

std::vector<neighbor> spatial_index::k_nearest(const point3d& q, index_t k) const {
  k = std::min(k, size());
  std::vector<neighbor> out;
  if (k <= 0) {
    return out;
  }
  std::priority_queue<heap_entry> heap;

  auto visit = [&](auto&& self, index_t n) -> void {
    const node& nd = nodes_[n];
    if (nd.axis < 0) {
      for (index_t i = nd.begin; i < nd.end; ++i) {
        index_t id = ids_[i];
        double d2 = squared_distance(q, points_[id]);
        if (static_cast<index_t>(heap.size()) < k) {
          heap.push({d2, id});
        } else if (closer(d2, id, heap.top().d2, heap.top().id)) {
          heap.pop();
          heap.push({d2, id});
        }
      }
      return;
    }
    double diff = q(nd.axis) - nd.split;
    index_t near_child = diff < 0.0 ? nd.left : nd.right;
    index_t far_child = diff < 0.0 ? nd.right : nd.left;
    self(self, near_child);
    if (static_cast<index_t>(heap.size()) < k || diff * diff <= heap.top().d2) {
      self(self, far_child);
    }
  };
  visit(visit, root_);

  out.resize(heap.size());
  for (auto i = static_cast<index_t>(heap.size()) - 1; i >= 0; --i) {
    out[i] = {heap.top().id, std::sqrt(heap.top().d2)};
    heap.pop();
  }
  return out;
}

std::vector<index_t> spatial_index::within_radius(const point3d& c, double radius) const {
  std::vector<index_t> out;
  if (!(radius > 0.0)) {
    return out;
  }
  double r2 = radius * radius;

  auto visit = [&](auto&& self, index_t n) -> void {
    const node& nd = nodes_[n];
    if (nd.axis < 0) {
      for (index_t i = nd.begin; i < nd.end; ++i) {
        if (squared_distance(c, points_[ids_[i]]) < r2) {
          out.push_back(ids_[i]);
        }
      }
      return;
    }
    double diff = c(nd.axis) - nd.split;
    index_t near_child = diff < 0.0 ? nd.left : nd.right;
    index_t far_child = diff < 0.0 ? nd.right : nd.left;
    self(self, near_child);
    if (diff * diff < r2) {
      self(self, far_child);
    }
  };
  visit(visit, root_);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rbfim
