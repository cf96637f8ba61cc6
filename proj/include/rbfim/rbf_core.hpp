#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbfim/types.hpp"

namespace rbfim {

enum class kernel_kind { gaussian, triharmonic, multiquadric, inverse_multiquadric, thin_plate_spline, multivariate_spline };

inline constexpr kernel_kind kAllKernels[] = {kernel_kind::gaussian,          kernel_kind::triharmonic,
                                              kernel_kind::multiquadric,      kernel_kind::inverse_multiquadric,
                                              kernel_kind::thin_plate_spline, kernel_kind::multivariate_spline};

std::string to_string(kernel_kind kind);
// Accepts the CLI spellings: gaussian, triharmonic, multiquadric, inv-multiquadric,
// thin-plate, multivariate-spline.
kernel_kind parse_kernel(const std::string& name);

// phi(r). Both spline kernels take the value 0 at r = 0.
template <class Scalar>
Scalar kernel_eval(kernel_kind kind, Scalar r) {
  using std::exp;
  using std::log;
  using std::log10;
  using std::sqrt;
  switch (kind) {
    case kernel_kind::gaussian:
      return exp(Scalar(-0.5) * r * r);
    case kernel_kind::triharmonic:
      return r * r * r;
    case kernel_kind::multiquadric:
      return sqrt(r * r + Scalar(0.25));
    case kernel_kind::inverse_multiquadric:
      return Scalar(1) / sqrt(r * r + Scalar(0.25));
    case kernel_kind::thin_plate_spline:
      return r > Scalar(0) ? r * r * log10(r) : Scalar(0);
    case kernel_kind::multivariate_spline:
      return r > Scalar(0) ? r * r * log(r) : Scalar(0);
  }
  return Scalar(0);
}

template <class Scalar>
using matrix_x = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using vector_x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Doolittle LU with row partial pivoting. Records the smallest pivot magnitude so callers
// can tell a near-singular factorization apart from a usable one.
template <class Scalar>
class partial_pivot_lu {
 public:
  explicit partial_pivot_lu(matrix_x<Scalar> a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const Eigen::Index n = lu_.rows();
    norm_inf_ = n > 0 ? lu_.cwiseAbs().rowwise().sum().maxCoeff() : Scalar(0);
    min_pivot_ = n > 0 ? std::numeric_limits<Scalar>::infinity() : Scalar(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      perm_[i] = i;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index p;
      lu_.col(k).tail(n - k).cwiseAbs().maxCoeff(&p);
      p += k;
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_[k], perm_[p]);
      }
      Scalar pivot = lu_(k, k);
      min_pivot_ = std::min(min_pivot_, Scalar(std::abs(pivot)));
      if (pivot == Scalar(0)) {
        continue;
      }
      const Eigen::Index rest = n - k - 1;
      lu_.col(k).tail(rest) /= pivot;
      lu_.bottomRightCorner(rest, rest).noalias() -= lu_.col(k).tail(rest) * lu_.row(k).tail(rest);
    }
  }

  Scalar min_pivot() const { return min_pivot_; }
  Scalar norm_inf() const { return norm_inf_; }

  // True when some pivot fell below tol * ||A||_inf.
  bool near_singular(Scalar tol) const { return !(min_pivot_ >= tol * norm_inf_) || min_pivot_ == Scalar(0); }

  vector_x<Scalar> solve(const vector_x<Scalar>& b) const {
    const Eigen::Index n = lu_.rows();
    vector_x<Scalar> x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = b[perm_[i]];
    }
    lu_.template triangularView<Eigen::UnitLower>().solveInPlace(x);
    lu_.template triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

 private:
  matrix_x<Scalar> lu_;
  std::vector<Eigen::Index> perm_;
  Scalar norm_inf_ = Scalar(0);
  Scalar min_pivot_ = Scalar(0);
};

enum class solve_path { direct, ridge, min_norm };

// f(p) = a x + b y + c z + d + sum_j w_j phi(|p - center_j| / scale)
template <class Scalar>
struct local_rbf {
  kernel_kind kernel = kernel_kind::gaussian;
  std::vector<point3<Scalar>> centers;
  vector_x<Scalar> weights;
  Eigen::Matrix<Scalar, 4, 1> poly = Eigen::Matrix<Scalar, 4, 1>::Zero();  // (a, b, c, d)
  Scalar scale = Scalar(1);
  solve_path path = solve_path::direct;
};

template <class Scalar>
struct rbf_system {
  matrix_x<Scalar> matrix;
  vector_x<Scalar> rhs;
};

// The (n + 4) x (n + 4) interpolation system in raw coordinates: kernel block, then the
// [1 x y z] border, right-hand side (values, 0, 0, 0, 0). Unknowns are (w_1..w_n, d, a, b, c).
template <class Scalar>
rbf_system<Scalar> assemble_system(std::span<const point3<Scalar>> centers, std::span<const Scalar> values,
                                   kernel_kind kind, Scalar scale) {
  const Eigen::Index n = static_cast<Eigen::Index>(centers.size());
  rbf_system<Scalar> sys{matrix_x<Scalar>::Zero(n + 4, n + 4), vector_x<Scalar>::Zero(n + 4)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Scalar r = (centers[i] - centers[j]).norm() / scale;
      sys.matrix(i, j) = sys.matrix(j, i) = kernel_eval(kind, r);
    }
    sys.matrix(i, n) = sys.matrix(n, i) = Scalar(1);
    for (int a = 0; a < 3; ++a) {
      sys.matrix(i, n + 1 + a) = sys.matrix(n + 1 + a, i) = centers[i](a);
    }
    sys.rhs[i] = values[i];
  }
  return sys;
}

// Unknown vector of assemble_system for a solved rbf.
template <class Scalar>
vector_x<Scalar> stacked_unknowns(const local_rbf<Scalar>& rbf) {
  const Eigen::Index n = rbf.weights.size();
  vector_x<Scalar> w(n + 4);
  w.head(n) = rbf.weights;
  w[n] = rbf.poly[3];
  w.template segment<3>(n + 1) = rbf.poly.template head<3>();
  return w;
}

inline constexpr double kPivotTolerance = 1e-12;

// kPivotTolerance is calibrated for double; wider scalars scale it by their epsilon.
template <class Scalar>
constexpr Scalar pivot_tolerance() {
  return Scalar(kPivotTolerance) * (std::numeric_limits<Scalar>::epsilon() / Scalar(std::numeric_limits<double>::epsilon()));
}

inline constexpr double kRidge = 1e-8;

// Solves the interpolation problem for one set of centers. The border is shifted to the
// centroid and divided by the centers' extent before factoring, which is the same system up to an
// invertible change of polynomial basis; coefficients are mapped back to raw coordinates.
//
// A factorization with a pivot below pivot_tolerance * ||A|| is retried with kRidge added
// to the kernel diagonal. If that still fails (the polynomial border is rank deficient, as
// with coplanar centers) the minimum-norm solution is used.
template <class Scalar>
local_rbf<Scalar> fit_rbf(std::span<const point3<Scalar>> centers, std::span<const Scalar> values, kernel_kind kind,
                          Scalar scale) {
  const Eigen::Index n = static_cast<Eigen::Index>(centers.size());
  if (n < 5) {
    throw numeric_error("rbf fit needs at least 5 centers, got " + std::to_string(n));
  }
  if (!(scale > Scalar(0))) {
    throw numeric_error("rbf fit needs a positive scale");
  }

  point3<Scalar> origin = point3<Scalar>::Zero();
  for (const auto& c : centers) {
    origin += c;
  }
  origin /= Scalar(n);
  Scalar extent = Scalar(0);
  for (const auto& c : centers) {
    extent = std::max(extent, Scalar((c - origin).norm()));
  }
  if (!(extent > Scalar(0))) {
    extent = Scalar(1);
  }

  matrix_x<Scalar> a = matrix_x<Scalar>::Zero(n + 4, n + 4);
  vector_x<Scalar> rhs = vector_x<Scalar>::Zero(n + 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Scalar r = (centers[i] - centers[j]).norm() / scale;
      a(i, j) = a(j, i) = kernel_eval(kind, r);
    }
    point3<Scalar> u = (centers[i] - origin) / extent;
    a(i, n) = a(n, i) = Scalar(1);
    for (int k = 0; k < 3; ++k) {
      a(i, n + 1 + k) = a(n + 1 + k, i) = u(k);
    }
    rhs[i] = values[i];
  }

  local_rbf<Scalar> out;
  out.kernel = kind;
  out.centers.assign(centers.begin(), centers.end());
  out.scale = scale;

  const Scalar tol = pivot_tolerance<Scalar>();
  vector_x<Scalar> x;
  partial_pivot_lu<Scalar> lu(a);
  if (!lu.near_singular(tol)) {
    x = lu.solve(rhs);
    x += lu.solve(rhs - a * x);  // one refinement step
    out.path = solve_path::direct;
  } else {
    matrix_x<Scalar> ridged = a;
    ridged.topLeftCorner(n, n).diagonal().array() += Scalar(kRidge);
    partial_pivot_lu<Scalar> ridge_lu(ridged);
    if (!ridge_lu.near_singular(tol)) {
      x = ridge_lu.solve(rhs);
      x += ridge_lu.solve(rhs - ridged * x);
      out.path = solve_path::ridge;
    } else {
      Eigen::CompleteOrthogonalDecomposition<matrix_x<Scalar>> cod(a);
      x = cod.solve(rhs);
      out.path = solve_path::min_norm;
    }
  }
  if (!x.allFinite()) {
    throw numeric_error("rbf system is singular");
  }

  out.weights = x.head(n);
  Eigen::Matrix<Scalar, 3, 1> grad = x.template segment<3>(n + 1) / extent;
  out.poly.template head<3>() = grad;
  out.poly[3] = x[n] - grad.dot(origin);
  return out;
}

template <class Scalar>
Scalar eval_local(const local_rbf<Scalar>& rbf, const point3<Scalar>& p) {
  Scalar sum = rbf.poly[0] * p(0) + rbf.poly[1] * p(1) + rbf.poly[2] * p(2) + rbf.poly[3];
  for (std::size_t j = 0; j < rbf.centers.size(); ++j) {
    Scalar r = (p - rbf.centers[j]).norm() / rbf.scale;
    sum += rbf.weights[static_cast<Eigen::Index>(j)] * kernel_eval(rbf.kernel, r);
  }
  return sum;
}

// Scalar used by the metric pipeline. Dense or near-planar subdomains can still carry
// weights far above the feature range, and the extra precision keeps them interpolating.
using field_scalar = long double;
using field_rbf = local_rbf<field_scalar>;

// Distance scale used for a subdomain of radius R. The polyharmonic kernels give the same
// interpolant at any scale (the change is absorbed by the linear part), so their distances
// are divided by R for conditioning. Gaussian and the multiquadrics carry a fixed shape in
// normalized units and keep the raw distance: dividing by R pushes them into the flat
// limit, where 40-point systems reach condition numbers near 1e19.
inline bool scale_invariant(kernel_kind kind) {
  return kind == kernel_kind::triharmonic || kind == kernel_kind::thin_plate_spline ||
         kind == kernel_kind::multivariate_spline;
}

template <class Scalar>
Scalar kernel_scale(kernel_kind kind, Scalar radius) {
  return scale_invariant(kind) ? radius : Scalar(1);
}

struct subdomain;
struct featured_cloud;

// Fits the subdomain's members with their features at kernel_scale(kind, radius).
field_rbf solve_local(const subdomain& sub, const featured_cloud& cloud, kernel_kind kind);

}  // namespace rbfim
