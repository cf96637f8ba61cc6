#include "rbfim/pou_blend.hpp"

#include <cmath>

#include "rbfim/parallel.hpp"

namespace rbfim {

namespace {

double local_value(const field_rbf& rbf, const point3d& p) {
  return static_cast<double>(eval_local(rbf, p.cast<field_scalar>().eval()));
}

}  // namespace

double blend_weight(const point3d& p, const subdomain& sub) {
  double d = (p - sub.center).norm();
  if (d >= sub.radius) {
    return 0.0;
  }
  if (d <= 1e-9) {
    return kCenterWeightCap;
  }
  double t = std::max(sub.radius - d, 0.0) / (sub.radius * d);
  return std::min(t * t, kCenterWeightCap);
}

global_feature_field::global_feature_field(subdomain_set subdomains, std::vector<field_rbf> locals)
    : subdomains_(std::move(subdomains)), locals_(std::move(locals)) {
  if (subdomains_.subdomains.empty()) {
    throw input_error("global_feature_field: no subdomains");
  }
  if (static_cast<index_t>(locals_.size()) != subdomains_.size()) {
    throw input_error("global_feature_field: one local function per subdomain required");
  }
  points3d centers;
  centers.reserve(subdomains_.subdomains.size());
  for (const subdomain& s : subdomains_.subdomains) {
    centers.push_back(s.center);
    max_radius_ = std::max(max_radius_, s.radius);
  }
  center_index_ = std::make_unique<spatial_index>(centers);
}

std::vector<index_t> global_feature_field::covering(const point3d& p) const {
  std::vector<index_t> out = center_index_->within_radius(p, max_radius_);
  std::erase_if(out, [&](index_t k) { return (p - subdomains_.subdomains[k].center).norm() >= subdomains_.subdomains[k].radius; });
  return out;
}

std::vector<std::pair<index_t, double>> global_feature_field::blend_coefficients(const point3d& p) const {
  std::vector<std::pair<index_t, double>> out;
  double total = 0.0;
  for (index_t k : covering(p)) {
    double w = blend_weight(p, subdomains_.subdomains[k]);
    if (w > 0.0) {
      out.emplace_back(k, w);
      total += w;
    }
  }
  for (auto& [k, w] : out) {
    w /= total;
  }
  return out;
}

double global_feature_field::eval(const point3d& p) const {
  double weighted = 0.0;
  double total = 0.0;
  for (index_t k : covering(p)) {
    double w = blend_weight(p, subdomains_.subdomains[k]);
    if (w > 0.0) {
      weighted += w * local_value(locals_[k], p);
      total += w;
    }
  }
  if (total > 0.0) {
    return weighted / total;
  }
  return local_value(locals_[nearest_subdomain(p)], p);
}

double eval_global(const global_feature_field& field, const point3d& p) { return field.eval(p); }

global_feature_field build_field(subdomain_set subdomains, const featured_cloud& cloud, kernel_kind kind, int threads) {
  std::vector<field_rbf> locals(subdomains.subdomains.size());
  parallel_for(subdomains.size(), threads,
               [&](index_t k) { locals[k] = solve_local(subdomains.subdomains[k], cloud, kind); });
  return global_feature_field(std::move(subdomains), std::move(locals));
}

}  // namespace rbfim
