#pragma once

// Dense Nystrom boundary operators on a BoundaryMesh:
//   V   trace of the single layer (Kussmaul-Martensen log splitting),
//   W   double layer boundary operator, W[1] = 1/2,
//   Wt  transpose of W in the weighted pairing,
//   S_+ / S_-  interior / exterior Steklov-Poincare operators.

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/kernels.hpp"

namespace layerpot {

enum class OperatorKind { V, W, Wt, Splus, Sminus };
enum class Side { plus, minus };

constexpr std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::V: return "V";
    case OperatorKind::W: return "W";
    case OperatorKind::Wt: return "Wt";
    case OperatorKind::Splus: return "Splus";
    case OperatorKind::Sminus: return "Sminus";
  }
  return "?";
}

constexpr std::string_view to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

using MeshPtr = std::shared_ptr<const BoundaryMesh>;

struct OperatorMatrix {
  OperatorKind kind = OperatorKind::V;
  Eigen::MatrixXd matrix;
  MeshPtr mesh;

  Index size() const { return matrix.rows(); }
};

inline GridFunction apply(const OperatorMatrix& op, const GridFunction& f) {
  require_length(f.size(), op.matrix.cols(), "apply");
  return op.matrix * f;
}

/// Row-major CSV dump; the first line is a `# kind=<K> n=<n>` header.
inline void dump_csv(const OperatorMatrix& op, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path);
  out << "# kind=" << to_string(op.kind) << " n=" << op.size() << '\n';
  out.precision(17);
  for (Index i = 0; i < op.matrix.rows(); ++i) {
    for (Index j = 0; j < op.matrix.cols(); ++j) {
      if (j) out << ',';
      out << op.matrix(i, j);
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed for " + path);
}

struct AssemblyOptions {
  /// Test hook: flips the sign of the W/Wt diagonal limit.
  bool flip_diagonal_sign = false;
  /// Reject W unless max|W[1] - 1/2| <= half_identity_tolerance.
  bool enforce_half_identity = true;
  double half_identity_tolerance = 1e-8;
};

namespace detail {

// Spectral weights for int_0^{2pi} ln(4 sin^2((t-s)/2)) f(s) ds on N uniform
// nodes, indexed by the node offset m = |i - j| mod N.
inline Eigen::VectorXd log_weights(Index n) {
  Eigen::VectorXd r(n);
  const Index half = n / 2;
  const double nn = static_cast<double>(n);
  for (Index m = 0; m < n; ++m) {
    double s = 0.0;
    for (Index l = 1; l < half; ++l)
      s += std::cos(kTwoPi * static_cast<double>(l * m % n) / nn) / static_cast<double>(l);
    r[m] = -4.0 * std::numbers::pi / nn * s -
           4.0 * std::numbers::pi / (nn * nn) * ((m % 2 == 0) ? 1.0 : -1.0);
  }
  return r;
}

}  // namespace detail

inline OperatorMatrix assemble_V(const MeshPtr& mesh) {
  const BoundaryMesh& m = *mesh;
  const Index n = m.size();
  OperatorMatrix op{OperatorKind::V, Eigen::MatrixXd(n, n), mesh};
  constexpr double inv4pi = 1.0 / (4.0 * std::numbers::pi);

  for (const auto& ci : m.components) {
    for (const auto& cj : m.components) {
      if (&ci == &cj) continue;
      for (Index i = ci.offset; i < ci.offset + ci.size; ++i)
        for (Index j = cj.offset; j < cj.offset + cj.size; ++j)
          op.matrix(i, j) =
              kernel2d::log_kernel(m.nodes.col(i) - m.nodes.col(j)) * m.weights[j];
    }
  }

  for (const auto& c : m.components) {
    const Index nc = c.size;
    const Eigen::VectorXd r = detail::log_weights(nc);
    const double h = kTwoPi / static_cast<double>(nc);
    for (Index a = 0; a < nc; ++a) {
      const Index i = c.offset + a;
      for (Index b = 0; b < nc; ++b) {
        const Index j = c.offset + b;
        const double k1 = inv4pi * m.speed[j];
        double k2;
        if (a == b) {
          k2 = inv4pi * m.speed[j] * std::log(m.speed[j] * m.speed[j]);
        } else {
          const double half_dt = 0.5 * (m.param[i] - m.param[j]);
          const double s2 = 4.0 * std::sin(half_dt) * std::sin(half_dt);
          k2 = inv4pi * m.speed[j] *
               std::log((m.nodes.col(i) - m.nodes.col(j)).squaredNorm() / s2);
        }
        op.matrix(i, j) = r[(a - b + nc) % nc] * k1 + h * k2;
      }
    }
  }
  return op;
}

inline OperatorMatrix assemble_W(const MeshPtr& mesh, const AssemblyOptions& opts = {}) {
  const BoundaryMesh& m = *mesh;
  const Index n = m.size();
  OperatorMatrix op{OperatorKind::W, Eigen::MatrixXd(n, n), mesh};
  const double diag_sign = opts.flip_diagonal_sign ? -1.0 : 1.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) {
        op.matrix(i, i) =
            diag_sign * m.curvature[i] / (4.0 * std::numbers::pi) * m.weights[i];
      } else {
        op.matrix(i, j) =
            kernel2d::double_layer(m.nodes.col(i), m.nodes.col(j), m.normals.col(j)) *
            m.weights[j];
      }
    }
  }
  if (opts.enforce_half_identity) {
    const double res = (op.matrix.rowwise().sum().array() - 0.5).abs().maxCoeff();
    if (!(res <= opts.half_identity_tolerance)) {
      throw Error(ErrorKind::InvalidGeometry,
                  "double layer operator fails W[1] = 1/2 (max residual " + std::to_string(res) +
                      "); mesh under-resolved or normals mis-oriented");
    }
  }
  return op;
}

/// D^{-1} A^T D with D = diag(weights): the transpose in the weighted pairing.
inline Eigen::MatrixXd weighted_transpose(const BoundaryMesh& m, const Eigen::MatrixXd& a) {
  return m.weights.cwiseInverse().asDiagonal() * a.transpose() * m.weights.asDiagonal();
}

inline OperatorMatrix assemble_Wt(const MeshPtr& mesh, const AssemblyOptions& opts = {}) {
  OperatorMatrix w = assemble_W(mesh, opts);
  return {OperatorKind::Wt, weighted_transpose(*mesh, w.matrix), mesh};
}

/// Density and constant of the single-layer ansatz v[eta] + c with
/// <eta, 1> = 0 whose boundary trace is the given data.
struct SingleLayerAnsatz {
  GridFunction density;
  double constant = 0.0;
};

/// Assembled operator set for one mesh. Immutable after construction and safe
/// to share read-only.
///
/// The constant-augmented system [V 1; w^T 0] is used for every Dirichlet
/// solve: it stays invertible where V alone is singular (unit-capacity
/// contours such as the unit circle).
class BoundaryOperators {
 public:
  explicit BoundaryOperators(BoundaryMesh mesh, const AssemblyOptions& opts = {})
      : mesh_(std::make_shared<const BoundaryMesh>(std::move(mesh))),
        topology_(topology_of(*mesh_)),
        options_(opts) {
    const Index n = mesh_->size();
    v_ = assemble_V(mesh_);
    w_ = assemble_W(mesh_, opts);
    wt_ = {OperatorKind::Wt, weighted_transpose(*mesh_, w_.matrix), mesh_};

    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = v_.matrix;
    aug.topRightCorner(n, 1).setOnes();
    aug.bottomLeftCorner(1, n) = mesh_->weights.transpose();
    ansatz_lu_.compute(aug);
    if (!(ansatz_lu_.rcond() > 1e-14)) {
      throw Error(ErrorKind::SingularSystem, "single-layer ansatz system is singular");
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 1, n);
    rhs.topRows(n).setIdentity();
    const Eigen::MatrixXd sol = ansatz_lu_.solve(rhs);
    ansatz_density_ = sol.topRows(n);
    ansatz_constant_ = sol.bottomRows(1).transpose();

    const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(n, n);
    splus_ = {OperatorKind::Splus, (-half + wt_.matrix) * ansatz_density_, mesh_};
    sminus_ = {OperatorKind::Sminus, (-half - wt_.matrix) * ansatz_density_, mesh_};
  }

  const MeshPtr& mesh_ptr() const { return mesh_; }
  const BoundaryMesh& mesh() const { return *mesh_; }
  const DomainTopology& topology() const { return topology_; }
  const AssemblyOptions& options() const { return options_; }
  Index size() const { return mesh_->size(); }

  const OperatorMatrix& V() const { return v_; }
  const OperatorMatrix& W() const { return w_; }
  const OperatorMatrix& Wt() const { return wt_; }
  const OperatorMatrix& steklov(Side side) const { return side == Side::plus ? splus_ : sminus_; }

  /// Weighted transpose S_side^t, the matrix that turns mu_1 into the grid
  /// representer of S_side^t[mu_1].
  Eigen::MatrixXd steklov_transpose(Side side) const {
    return weighted_transpose(*mesh_, steklov(side).matrix);
  }

  /// Solves V eta + c = g, <eta, 1> = 0.
  SingleLayerAnsatz solve_ansatz(const GridFunction& g) const {
    require_length(g.size(), size(), "solve_ansatz");
    SingleLayerAnsatz a;
    a.density = ansatz_density_ * g;
    a.constant = ansatz_constant_.dot(g);
    return a;
  }

  /// Row vector g -> c of the ansatz: the value at infinity of the exterior
  /// Dirichlet solution with data g.
  const Eigen::VectorXd& ansatz_constant_functional() const { return ansatz_constant_; }
  const Eigen::MatrixXd& ansatz_density_map() const { return ansatz_density_; }

  Eigen::MatrixXd half_identity_plus_W(double sign) const {
    return sign * 0.5 * Eigen::MatrixXd::Identity(size(), size()) + w_.matrix;
  }
  Eigen::MatrixXd half_identity_plus_Wt(double sign) const {
    return sign * 0.5 * Eigen::MatrixXd::Identity(size(), size()) + wt_.matrix;
  }

 private:
  MeshPtr mesh_;
  DomainTopology topology_;
  AssemblyOptions options_;
  OperatorMatrix v_, w_, wt_, splus_, sminus_;
  Eigen::PartialPivLU<Eigen::MatrixXd> ansatz_lu_;
  Eigen::MatrixXd ansatz_density_;
  Eigen::VectorXd ansatz_constant_;
};

using OperatorsPtr = std::shared_ptr<const BoundaryOperators>;

inline OperatorsPtr make_operators(BoundaryMesh mesh, const AssemblyOptions& opts = {}) {
  return std::make_shared<const BoundaryOperators>(std::move(mesh), opts);
}

inline const OperatorMatrix& steklov(const BoundaryOperators& ops, Side side) {
  return ops.steklov(side);
}

}  // namespace layerpot
