#pragma once

// Dense rank-revealing helpers: minimum-norm least squares, numerical null
// spaces and principal angles between subspaces.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace layerpot {

/// Relative singular-value threshold for every rank decision in the library.
inline constexpr double kRankThreshold = 1e-10;

/// Minimum-norm least-squares solution of A x = b with singular values below
/// threshold * sigma_max discarded.
struct LeastSquares {
  Eigen::VectorXd solution;
  double residual = 0.0;  // max-norm of A x - b
  Eigen::Index rank = 0;
};

class MinNormSolver {
 public:
  explicit MinNormSolver(const Eigen::MatrixXd& a, double threshold = kRankThreshold)
      : a_(a), svd_(a, Eigen::ComputeThinU | Eigen::ComputeThinV) {
    svd_.setThreshold(threshold);
  }

  LeastSquares solve(const Eigen::VectorXd& b) const {
    LeastSquares ls;
    ls.solution = svd_.solve(b);
    ls.residual = (a_ * ls.solution - b).lpNorm<Eigen::Infinity>();
    ls.rank = svd_.rank();
    return ls;
  }

  Eigen::MatrixXd pseudo_inverse() const {
    const auto& s = svd_.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < svd_.rank(); ++i) inv[i] = 1.0 / s[i];
    return svd_.matrixV() * inv.asDiagonal() * svd_.matrixU().transpose();
  }

  Eigen::Index rank() const { return svd_.rank(); }
  const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::BDCSVD<Eigen::MatrixXd> svd_;
};

inline LeastSquares min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   double threshold = kRankThreshold) {
  return MinNormSolver(a, threshold).solve(b);
}

/// Numerical null space of a square matrix. `gap_ratio` is the smallest kept
/// singular value over the largest discarded one (the discarded one is
/// floored at eps * sigma_max, so an empty kernel reports a finite ratio).
struct NumericalKernel {
  Eigen::MatrixXd basis;  // orthonormal columns
  Eigen::VectorXd small_singular_values;
  Eigen::VectorXd singular_values;
  double gap_ratio = 0.0;
};

inline NumericalKernel numerical_kernel(const Eigen::MatrixXd& a, double tol = kRankThreshold) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index n = s.size();
  const double smax = s[0];
  Eigen::Index rank = 0;
  while (rank < n && s[rank] > tol * smax) ++rank;
  NumericalKernel k;
  k.singular_values = s;
  k.basis = svd.matrixV().rightCols(a.cols() - rank);
  k.small_singular_values = s.tail(n - rank);
  const double floor = std::numeric_limits<double>::epsilon() * smax;
  const double kept = rank > 0 ? s[rank - 1] : smax;
  const double dropped = rank < n ? std::max(s[rank], floor) : floor;
  k.gap_ratio = kept / dropped;
  return k;
}

/// Sine of the largest principal angle between the column spaces of a and b
/// (equal dimensions). Returns 1 when the dimensions differ.
inline double subspace_sine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::MatrixXd residual = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return svd.singularValues()[0];
}

}  // namespace layerpot
