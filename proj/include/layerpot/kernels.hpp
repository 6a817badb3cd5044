#pragma once

// Fundamental solution of the Laplace operator, normalized so that its
// Laplacian is the Dirac mass: S_2 = (1/2pi) ln|x|, S_3 = -1/(4pi|x|).

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "layerpot/error.hpp"

namespace layerpot {

inline double fundamental_solution(int dim, const Eigen::VectorXd& xi) {
  require(dim == 2 || dim == 3, ErrorKind::OutOfRange,
          "dimension must be 2 or 3, got " + std::to_string(dim));
  require_length(xi.size(), dim, "fundamental_solution");
  const double r = xi.norm();
  require(r > 0.0, ErrorKind::SingularPoint, "fundamental solution evaluated at xi = 0");
  if (dim == 2) return std::log(r) / (2.0 * std::numbers::pi);
  return -1.0 / (4.0 * std::numbers::pi * r);
}

/// Gradient of the fundamental solution: xi / (s_n |xi|^n), s_2 = 2pi, s_3 = 4pi.
inline Eigen::VectorXd grad_fundamental_solution(int dim, const Eigen::VectorXd& xi) {
  require(dim == 2 || dim == 3, ErrorKind::OutOfRange,
          "dimension must be 2 or 3, got " + std::to_string(dim));
  require_length(xi.size(), dim, "grad_fundamental_solution");
  const double r = xi.norm();
  require(r > 0.0, ErrorKind::SingularPoint, "gradient evaluated at xi = 0");
  if (dim == 2) return xi / (2.0 * std::numbers::pi * r * r);
  return xi / (4.0 * std::numbers::pi * r * r * r);
}

namespace kernel2d {

inline double log_kernel(const Eigen::Vector2d& xi) {
  return std::log(xi.squaredNorm()) / (4.0 * std::numbers::pi);
}

/// d/d nu_y S_2(x - y) = nu_y . (y - x) / (2pi |x - y|^2).
inline double double_layer(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                           const Eigen::Vector2d& nu_y) {
  const Eigen::Vector2d d = y - x;
  return nu_y.dot(d) / (2.0 * std::numbers::pi * d.squaredNorm());
}

}  // namespace kernel2d

}  // namespace layerpot
