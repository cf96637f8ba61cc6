#include "rbfim/partition.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rbfim/parallel.hpp"

namespace rbfim {

void partition_config::validate() const {
  if (t_min < 1 || t_min >= t_max) {
    throw input_error("partition: need 1 <= t_min < t_max");
  }
  if (!(eps0 > 0.0)) {
    throw input_error("partition: eps0 must be positive");
  }
  if (!(growth_factor > 1.0) || !(shrink_factor > 0.0 && shrink_factor < 1.0)) {
    throw input_error("partition: need growth_factor > 1 > shrink_factor > 0");
  }
  if (max_adjust_iters < 0 || min_forced_level < 0 || max_level < min_forced_level || max_level > 20) {
    throw input_error("partition: invalid level or iteration limits");
  }
}

double taubin_error(std::span<const point3d> points, double radius) {
  if (points.size() < 3) {
    return 0.0;
  }
  point3d centroid = point3d::Zero();
  for (const point3d& p : points) {
    centroid += p;
  }
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const point3d& p : points) {
    point3d d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  point3d normal = es.eigenvectors().col(0);
  double worst = 0.0;
  for (const point3d& p : points) {
    worst = std::max(worst, std::abs(normal.dot(p - centroid)));
  }
  return worst / radius;
}

namespace {

struct cell_key {
  int level;
  std::int64_t ix, iy, iz;

  double edge() const { return kNormalizedExtent / static_cast<double>(std::int64_t{1} << level); }
  point3d lo() const { return edge() * point3d(double(ix), double(iy), double(iz)); }
  point3d center() const { return lo() + point3d::Constant(0.5 * edge()); }
  std::uint64_t linear() const {
    return (std::uint64_t(ix) << (2 * level)) | (std::uint64_t(iy) << level) | std::uint64_t(iz);
  }
  cell_key child(int octant) const {
    return {level + 1, 2 * ix + ((octant >> 2) & 1), 2 * iy + ((octant >> 1) & 1), 2 * iz + (octant & 1)};
  }
};

class octree_builder {
 public:
  octree_builder(std::span<const point3d> positions, const spatial_index& index, const partition_config& cfg)
      : positions_(positions), index_(index), cfg_(cfg) {}

  // Runs one cell. Children that need processing are either recursed into or, when
  // `defer` is set, handed back so the caller can schedule them.
  void visit(const cell_key& cell, std::vector<subdomain>& out, std::vector<cell_key>* defer) const {
    const double edge = cell.edge();
    const point3d lo = cell.lo();
    const point3d hi = lo + point3d::Constant(edge);
    const point3d c = cell.center();
    const double r0 = 0.5 * edge * std::sqrt(3.0);

    std::vector<index_t> ids = index_.within_radius(c, r0);
    bool cube_empty = std::none_of(ids.begin(), ids.end(), [&](index_t id) {
      const point3d& p = positions_[id];
      return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    });
    if (cube_empty) {
      return;
    }

    const auto n = static_cast<index_t>(ids.size());
    subdomain sub;
    sub.center = c;
    sub.radius = r0;
    sub.level = cell.level;
    sub.cell = cell.linear();

    if (n > cfg_.t_max) {
      bool split = cell.level < cfg_.min_forced_level;
      if (!split) {
        std::vector<point3d> pts;
        pts.reserve(ids.size());
        for (index_t id : ids) {
          pts.push_back(positions_[id]);
        }
        sub.taubin_eps = taubin_error(pts, r0);
        split = sub.taubin_eps > cfg_.eps0;
      }
      if (split && cell.level < cfg_.max_level) {
        for (int o = 0; o < 8; ++o) {
          if (defer) {
            defer->push_back(cell.child(o));
          } else {
            visit(cell.child(o), out, nullptr);
          }
        }
        return;
      }
      sub.flag = subdomain_flag::oversized;
    } else if (n < cfg_.t_min) {
      adjust_radius(sub, ids);
    }
    sub.member_ids = std::move(ids);
    out.push_back(std::move(sub));
  }

 private:
  // Grows the ball until the count reaches [t_min, t_max]. Overshoots step back by
  // shrink_factor but never below the largest radius already known to be too small;
  // from then on the bracket is bisected.
  void adjust_radius(subdomain& sub, std::vector<index_t>& ids) const {
    double r = sub.radius;
    double too_small = r;
    double too_large = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg_.max_adjust_iters; ++it) {
      const auto n = static_cast<index_t>(ids.size());
      if (n < cfg_.t_min) {
        too_small = r;
        r = std::isinf(too_large) ? r * cfg_.growth_factor : 0.5 * (too_small + too_large);
      } else if (n > cfg_.t_max) {
        too_large = r;
        double shrunk = r * cfg_.shrink_factor;
        r = shrunk > too_small ? shrunk : 0.5 * (too_small + too_large);
      } else {
        break;
      }
      ids = index_.within_radius(sub.center, r);
      sub.radius = r;
    }
    const auto n = static_cast<index_t>(ids.size());
    if (n > cfg_.t_max) {
      sub.flag = subdomain_flag::oversized;
    } else if (n < cfg_.t_min) {
      sub.flag = subdomain_flag::undersized;
    }
  }

  std::span<const point3d> positions_;
  const spatial_index& index_;
  const partition_config& cfg_;
};

}  // namespace

subdomain_set decompose(std::span<const point3d> positions, const spatial_index& index, const partition_config& cfg,
                        int threads) {
  cfg.validate();
  if (positions.empty()) {
    throw input_error("decompose: empty cloud");
  }
  if (index.size() != static_cast<index_t>(positions.size())) {
    throw input_error("decompose: index was built over a different point set");
  }
  octree_builder builder(positions, index, cfg);

  // Shallow levels run breadth-first on the calling thread; subtrees from
  // min_forced_level down are processed in parallel.
  std::vector<subdomain> accepted;
  std::vector<cell_key> frontier{{0, 0, 0, 0}};
  for (int level = 0; level < cfg.min_forced_level && !frontier.empty(); ++level) {
    std::vector<cell_key> next;
    for (const cell_key& cell : frontier) {
      builder.visit(cell, accepted, &next);
    }
    frontier = std::move(next);
  }

  std::vector<std::vector<subdomain>> partial(frontier.size());
  parallel_for(static_cast<index_t>(frontier.size()), threads,
               [&](index_t i) { builder.visit(frontier[i], partial[i], nullptr); });
  for (auto& part : partial) {
    std::move(part.begin(), part.end(), std::back_inserter(accepted));
  }
  std::sort(accepted.begin(), accepted.end(), [](const subdomain& a, const subdomain& b) {
    return a.level != b.level ? a.level < b.level : a.cell < b.cell;
  });

  std::vector<char> covered(positions.size(), 0);
  for (const subdomain& s : accepted) {
    for (index_t id : s.member_ids) {
      covered[id] = 1;
    }
  }
  const index_t want = std::min<index_t>(cfg.t_min, index.size());
  for (index_t id = 0; id < static_cast<index_t>(positions.size()); ++id) {
    if (covered[id]) {
      continue;
    }
    subdomain sub;
    sub.center = positions[id];
    double kth = index.k_nearest(positions[id], want).back().distance;
    sub.radius = std::max(kth * (1.0 + 1e-9), 1e-9);
    sub.member_ids = index.within_radius(sub.center, sub.radius);
    sub.level = -1;
    sub.cell = static_cast<std::uint64_t>(id);
    sub.flag = sub.size() < cfg.t_min ? subdomain_flag::undersized : subdomain_flag::repair;
    for (index_t m : sub.member_ids) {
      covered[m] = 1;
    }
    accepted.push_back(std::move(sub));
  }
  return {std::move(accepted)};
}

}  // namespace rbfim
