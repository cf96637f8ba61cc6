#include "rbfim/rbfim_metric.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rbfim/parallel.hpp"

namespace rbfim {

namespace {

class stage_timer {
 public:
  explicit stage_timer(std::map<std::string, double>& sink) : sink_(sink), start_(clock::now()), last_(start_) {}

  void mark(const std::string& stage) {
    auto now = clock::now();
    sink_[stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }
  void finish() { sink_["total"] = std::chrono::duration<double>(clock::now() - start_).count(); }

 private:
  using clock = std::chrono::steady_clock;
  std::map<std::string, double>& sink_;
  clock::time_point start_;
  clock::time_point last_;
};

const char* path_name(solve_path p) {
  switch (p) {
    case solve_path::direct:
      return "direct";
    case solve_path::ridge:
      return "ridge";
    case solve_path::min_norm:
      return "min_norm";
  }
  return "?";
}

}  // namespace

void rbfim_config::validate() const {
  partition.validate();
  if (grid_scale < 1) {
    throw input_error("grid scale must be >= 1");
  }
  if (!(ref_fraction > 0.0 && ref_fraction <= 1.0)) {
    throw input_error("reference fraction must lie in (0, 1]");
  }
  if (feature.type == feature_type::curvature && feature.curvature_k < 3) {
    throw input_error("curvature needs at least 3 neighbors");
  }
}

std::vector<index_t> select_reference(index_t n_original, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw input_error("reference fraction must lie in (0, 1]");
  }
  std::vector<index_t> all(n_original);
  std::iota(all.begin(), all.end(), index_t{0});
  if (fraction == 1.0) {
    return all;
  }
  auto k = static_cast<index_t>(std::ceil(fraction * static_cast<double>(n_original)));
  k = std::clamp<index_t>(k, 1, n_original);
  std::vector<index_t> picked;
  picked.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

pool_result grid_pool(std::span<const point3d> positions, std::span<const double> original_values,
                      std::span<const double> distorted_values, int grid_scale) {
  if (positions.empty()) {
    throw input_error("grid_pool: no reference points");
  }
  if (original_values.size() != positions.size() || distorted_values.size() != positions.size()) {
    throw input_error("grid_pool: every reference point needs both values");
  }
  if (grid_scale < 1) {
    throw input_error("grid_pool: grid scale must be >= 1");
  }
  const std::int64_t l = grid_scale;
  auto bin = [&](double coord) {
    auto i = static_cast<std::int64_t>(std::floor(coord * static_cast<double>(l) / kNormalizedExtent));
    return std::clamp<std::int64_t>(i, 0, l - 1);
  };

  struct accum {
    double sum_o = 0.0;
    double sum_d = 0.0;
    index_t count = 0;
  };
  std::map<std::int64_t, accum> cells;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const point3d& p = positions[i];
    std::int64_t key = (bin(p(0)) * l + bin(p(1))) * l + bin(p(2));
    accum& a = cells[key];
    a.sum_o += original_values[i];
    a.sum_d += distorted_values[i];
    ++a.count;
  }

  pool_result out;
  double total = 0.0;
  for (const auto& [key, a] : cells) {
    double n = static_cast<double>(a.count);
    cell_means m{key, a.sum_o / n, a.sum_d / n, a.count};
    total += std::abs(m.mean_distorted - m.mean_original);
    out.cells.push_back(m);
  }
  out.m_r = static_cast<index_t>(out.cells.size());
  out.distortion = total / static_cast<double>(out.m_r);
  return out;
}

double quality_from_distortion(double distortion, double q_cap) {
  if (!(distortion >= 0.0)) {
    throw input_error("distortion must be non-negative");
  }
  if (distortion == 0.0) {
    return q_cap;
  }
  return std::min(q_cap, 20.0 * std::log10(255.0 / distortion));
}

subdomain_set merge_small_subdomains(subdomain_set set, const spatial_index& index, index_t min_members) {
  auto& subs = set.subdomains;
  for (;;) {
    if (subs.size() < 2) {
      break;
    }
    auto small = std::find_if(subs.begin(), subs.end(), [&](const subdomain& s) { return s.size() < min_members; });
    if (small == subs.end()) {
      break;
    }
    std::size_t from = static_cast<std::size_t>(small - subs.begin());
    std::size_t best = from;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (k == from) {
        continue;
      }
      double d2 = squared_distance(subs[k].center, subs[from].center);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    subdomain& target = subs[best];
    double reach = target.radius;
    for (index_t id : subs[from].member_ids) {
      reach = std::max(reach, (index.point(id) - target.center).norm() * (1.0 + 1e-9) + 1e-9);
    }
    target.radius = reach;
    target.member_ids = index.within_radius(target.center, reach);
    subs.erase(subs.begin() + static_cast<std::ptrdiff_t>(from));
  }
  return set;
}

metric_report compute_rbfim(const point_cloud& original, const point_cloud& distorted, const rbfim_config& cfg) {
  cfg.validate();
  metric_report report;
  report.config = cfg;
  stage_timer timer(report.timings);

  auto [orig, dist_raw, params] = normalize_pair(original, distorted, cfg.feature);
  featured_cloud dist = merge_duplicates(dist_raw);
  report.n_original = orig.size();
  report.n_distorted = dist.size();
  timer.mark("normalize");

  spatial_index dist_index(dist.positions);
  subdomain_set subs = decompose(dist.positions, dist_index, cfg.partition, cfg.threads);
  subs = merge_small_subdomains(std::move(subs), dist_index, 5);
  if (subs.subdomains.size() == 1 && subs.subdomains.front().size() < 5) {
    throw numeric_error("distorted cloud needs at least 5 distinct points, has " + std::to_string(dist.size()));
  }
  report.n_subdomains = subs.size();
  timer.mark("partition");

  global_feature_field field = build_field(std::move(subs), dist, cfg.kernel, cfg.threads);
  for (const auto& local : field.locals()) {
    ++report.solve_paths[path_name(local.path)];
  }
  timer.mark("solve");

  std::vector<index_t> ref = select_reference(orig.size(), cfg.ref_fraction, cfg.rng_seed);
  points3d ref_positions(ref.size());
  std::vector<double> v_o(ref.size());
  std::vector<double> v_d(ref.size());
  parallel_for(static_cast<index_t>(ref.size()), cfg.threads, [&](index_t i) {
    ref_positions[i] = orig.positions[ref[i]];
    v_o[i] = orig.features[ref[i]];
    v_d[i] = field.eval(ref_positions[i]);
  });
  report.n_reference = static_cast<index_t>(ref.size());
  timer.mark("evaluate");

  pool_result pooled = grid_pool(ref_positions, v_o, v_d, cfg.grid_scale);
  report.d_rbfim = pooled.distortion;
  report.m_r = pooled.m_r;
  report.per_cell = std::move(pooled.cells);
  report.q_rbfim = quality_from_distortion(report.d_rbfim, cfg.q_cap);
  timer.mark("pool");
  timer.finish();
  return report;
}

}  // namespace rbfim
