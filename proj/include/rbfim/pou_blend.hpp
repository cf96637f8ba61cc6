#pragma once

#include <memory>
#include <vector>

#include "rbfim/partition.hpp"
#include "rbfim/rbf_core.hpp"

namespace rbfim {

// w_k(p) = (max(R_k - d, 0) / (R_k d))^2 with d = |p - c_k|, capped at 1e18 near the center.
double blend_weight(const point3d& p, const subdomain& sub);

inline constexpr double kCenterWeightCap = 1e18;

// Partition-of-unity blend of one local RBF per subdomain.
class global_feature_field {
 public:
  global_feature_field(subdomain_set subdomains, std::vector<field_rbf> locals);

  const subdomain_set& subdomains() const { return subdomains_; }
  const std::vector<field_rbf>& locals() const { return locals_; }
  index_t size() const { return subdomains_.size(); }

  // Subdomains whose support strictly contains p, ascending.
  std::vector<index_t> covering(const point3d& p) const;

  // Lambda_k(p) = w_k / sum w for the covering subdomains; empty when p is uncovered.
  std::vector<std::pair<index_t, double>> blend_coefficients(const point3d& p) const;

  // Sum of Lambda_k f_k(p). Outside every support, the local function of the subdomain
  // with the nearest center is used instead.
  double eval(const point3d& p) const;

  index_t nearest_subdomain(const point3d& p) const { return center_index_->nearest(p).id; }

 private:
  subdomain_set subdomains_;
  std::vector<field_rbf> locals_;
  std::unique_ptr<spatial_index> center_index_;
  double max_radius_ = 0.0;
};

double eval_global(const global_feature_field& field, const point3d& p);

// Solves every subdomain (in parallel) and assembles the field.
global_feature_field build_field(subdomain_set subdomains, const featured_cloud& cloud, kernel_kind kind,
                                 int threads = 1);

}  // namespace rbfim
