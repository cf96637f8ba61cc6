#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbfim {

using index_t = std::int64_t;

template <class Scalar>
using point3 = Eigen::Matrix<Scalar, 3, 1>;

using point3d = point3<double>;
using points3d = std::vector<point3d>;

// Side length of the normalized cube every cloud is mapped into.
inline constexpr double kNormalizedExtent = 1024.0;

// Raised for malformed input data (files, manifests, arguments).
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical stage cannot produce a result.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Scalar>
Scalar squared_distance(const point3<Scalar>& a, const point3<Scalar>& b) {
  Scalar dx = a(0) - b(0);
  Scalar dy = a(1) - b(1);
  Scalar dz = a(2) - b(2);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace rbfim
