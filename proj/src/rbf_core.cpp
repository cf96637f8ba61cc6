#include "rbfim/rbf_core.hpp"

#include "rbfim/partition.hpp"

namespace rbfim {

std::string to_string(kernel_kind kind) {
  switch (kind) {
    case kernel_kind::gaussian:
      return "gaussian";
    case kernel_kind::triharmonic:
      return "triharmonic";
    case kernel_kind::multiquadric:
      return "multiquadric";
    case kernel_kind::inverse_multiquadric:
      return "inv-multiquadric";
    case kernel_kind::thin_plate_spline:
      return "thin-plate";
    case kernel_kind::multivariate_spline:
      return "multivariate-spline";
  }
  return "?";
}

kernel_kind parse_kernel(const std::string& name) {
  for (kernel_kind k : kAllKernels) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw input_error("unknown kernel '" + name + "'");
}

field_rbf solve_local(const subdomain& sub, const featured_cloud& cloud, kernel_kind kind) {
  std::vector<point3<field_scalar>> centers;
  std::vector<field_scalar> values;
  centers.reserve(sub.member_ids.size());
  values.reserve(sub.member_ids.size());
  for (index_t id : sub.member_ids) {
    centers.push_back(cloud.positions[id].cast<field_scalar>());
    values.push_back(cloud.features[id]);
  }
  return fit_rbf<field_scalar>(centers, values, kind, kernel_scale<field_scalar>(kind, sub.radius));
}

}  // namespace rbfim
