#pragma once

// First-order boundary distributions tau = mu_0 + S_side^t[mu_1]: grid
// representers, the duality pairing, single layers of distributions, the
// J isometry onto grid functions, Wt acting on distributions, and the
// distributional jump relations.
//
// Two encodings are kept apart on purpose: PairDistribution is exact in the
// densities, DistRep is the nodal vector phi with <tau, v> = pairing(phi, v)
// used for linear algebra. Conversions are always explicit.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "layerpot/dirichlet.hpp"
#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/linalg.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/potentials.hpp"

namespace layerpot {

struct PairDistribution {
  Side side = Side::plus;
  GridFunction mu0;
  GridFunction mu1;

  /// An ordinary grid function viewed as a distribution.
  static PairDistribution function(GridFunction f, Side side = Side::plus) {
    PairDistribution t;
    t.side = side;
    t.mu1 = GridFunction::Zero(f.size());
    t.mu0 = std::move(f);
    return t;
  }

  static PairDistribution pair(Side side, GridFunction mu0, GridFunction mu1) {
    return {side, std::move(mu0), std::move(mu1)};
  }
};

struct DistRep {
  GridFunction representer;
  double mass = 0.0;
};

/// Result of Wt applied to a distribution, in J coordinates: j_image is
/// J[Wt tau], mass is <Wt tau, 1> = <tau, 1> / 2, pair a side-matched
/// PairDistribution with that J image.
struct WtImage {
  GridFunction j_image;
  double mass = 0.0;
  PairDistribution pair;
};

struct JumpResiduals {
  double interior = 0.0;
  std::optional<double> exterior;
  std::string note;
};

inline constexpr int kTestFunctionCount = 16;

/// cos(k t), k = 0..7 and sin(k t), k = 1..8 in each curve's parameter.
inline Eigen::MatrixXd smooth_test_functions(const BoundaryMesh& mesh) {
  Eigen::MatrixXd e(mesh.size(), kTestFunctionCount);
  for (Index i = 0; i < mesh.size(); ++i) {
    const double t = mesh.param[i];
    for (int k = 0; k < 8; ++k) {
      e(i, k) = std::cos(k * t);
      e(i, 8 + k) = std::sin((k + 1) * t);
    }
  }
  return e;
}

class DistributionSpace {
 public:
  explicit DistributionSpace(OperatorsPtr ops) : ops_(std::move(ops)) {
    const BoundaryOperators& o = *ops_;
    const BoundaryMesh& m = o.mesh();
    const Index n = m.size();
    length_ = boundary_length(m);
    v_one_ = o.V().matrix * GridFunction::Ones(n);
    splus_t_ = o.steklov_transpose(Side::plus);
    sminus_t_ = o.steklov_transpose(Side::minus);

    // Locally constant mass carriers: chi of dOmega_j (plus) or of
    // d(Omega^-)_k (minus).
    for (const auto& chi : o.topology().omega_masks) carriers_plus_.push_back(chi);
    for (const auto& chi : o.topology().omega_minus_masks) carriers_minus_.push_back(chi);

    j_plus_ = std::make_unique<MinNormSolver>(j_matrix(Side::plus));
    j_minus_ = std::make_unique<MinNormSolver>(j_matrix(Side::minus));
  }

  const BoundaryOperators& operators() const { return *ops_; }
  const OperatorsPtr& operators_ptr() const { return ops_; }
  const BoundaryMesh& mesh() const { return ops_->mesh(); }

  /// <tau, 1>. S_side^t[mu_1] carries no mass (S_side[1] = 0 in 2-D).
  double mass(const PairDistribution& tau) const {
    check(tau);
    return integrate(mesh(), tau.mu0);
  }

  const Eigen::MatrixXd& steklov_transpose(Side side) const {
    return side == Side::plus ? splus_t_ : sminus_t_;
  }

  DistRep to_grid_representer(const PairDistribution& tau) const {
    check(tau);
    return {tau.mu0 + steklov_transpose(tau.side) * tau.mu1, mass(tau)};
  }

  /// <tau, v> = pairing(mu_0, v) + pairing(mu_1, S_side v).
  double dist_pairing(const PairDistribution& tau, const GridFunction& v) const {
    check(tau);
    require_length(v.size(), ops_->size(), "dist_pairing");
    return pairing(mesh(), tau.mu0, v) +
           pairing(mesh(), tau.mu1, ops_->steklov(tau.side).matrix * v);
  }

  /// Boundary trace of the single layer of tau through the closed identities
  ///   V[S_+^t mu] = (-I/2 + W) mu,
  ///   V[S_-^t mu] = (-I/2 - W) mu + c_mu,
  /// with c_mu the limit at infinity of the exterior Dirichlet solution.
  GridFunction V_of_distribution(const PairDistribution& tau) const {
    check(tau);
    return ops_->V().matrix * tau.mu0 + trace_operator(tau.side) * tau.mu1;
  }

  /// J[tau] = V[tau - m/|dOmega|] + m/|dOmega|, m = <tau, 1>.
  GridFunction J(const PairDistribution& tau) const {
    const double mean = mass(tau) / length_;
    return V_of_distribution(tau) - mean * v_one_ +
           GridFunction::Constant(ops_->size(), mean);
  }

  /// Inverse of J: a pair of the requested side whose mu_0 is locally
  /// constant and carries the mass. Solved by minimum-norm least squares.
  PairDistribution J_inverse(const GridFunction& g, Side side = Side::plus) const {
    require_length(g.size(), ops_->size(), "J_inverse");
    const auto& solver = side == Side::plus ? *j_plus_ : *j_minus_;
    const auto& carriers = side == Side::plus ? carriers_plus_ : carriers_minus_;
    const LeastSquares ls = solver.solve(g);
    if (!(ls.residual <= 1e-7 * std::max(1.0, g.lpNorm<Eigen::Infinity>()))) {
      throw Error(ErrorKind::SingularSystem,
                  "J inverse residual " + std::to_string(ls.residual) + " exceeds tolerance",
                  {ls.residual});
    }
    const Index q = static_cast<Index>(carriers.size());
    PairDistribution tau;
    tau.side = side;
    tau.mu0 = GridFunction::Zero(ops_->size());
    for (Index k = 0; k < q; ++k) tau.mu0 += ls.solution[k] * carriers[k];
    tau.mu1 = ls.solution.tail(ops_->size());
    return tau;
  }

  /// Wt tau in J coordinates:
  ///   J[Wt tau] = W J[tau] + (W V[1] - V[1]/2) m/|dOmega|,  <Wt tau, 1> = m/2.
  WtImage Wt_on_distribution(const PairDistribution& tau) const {
    const GridFunction jt = J(tau);
    const double m = mass(tau);
    const auto& w = ops_->W().matrix;
    WtImage out;
    out.j_image = w * jt + (w * v_one_ - 0.5 * v_one_) * (m / length_);
    out.mass = 0.5 * m;
    out.pair = J_inverse(out.j_image, tau.side);
    return out;
  }

  /// v^{+/-}[tau] as a field in the requested region, through the
  /// representation of S_side^t[mu_1] single layers by double layers and
  /// Dirichlet solutions.
  HarmonicField dist_single_layer(const PairDistribution& tau, Region region) const {
    check(tau);
    HarmonicField f;
    f.mesh = ops_->mesh_ptr();
    f.region = region;
    f.add_single(tau.mu0);
    const SingleLayerAnsatz g = ops_->solve_ansatz(tau.mu1);
    if (tau.side == Side::plus) {
      f.add_double(tau.mu1);
      if (region == Region::interior) {
        f.add_single(-g.density);
        f.constant -= g.constant;
      }
    } else {
      f.add_double(-tau.mu1);
      if (region == Region::interior) {
        f.constant += g.constant;
      } else {
        f.add_single(-g.density);
      }
    }
    return f;
  }

  Eigen::VectorXd dist_single_layer_field(const PairDistribution& tau, const Points& points,
                                          Region region) const {
    return dist_single_layer(tau, region).evaluate(points);
  }

  /// d u / d nu = S_+^t[u|dOmega] (plus) or d u / d nu_{Omega^-} = S_-^t[u|dOmega] (minus).
  static PairDistribution dist_normal_derivative(const GridFunction& trace, Side side) {
    return {side, GridFunction::Zero(trace.size()), trace};
  }

  /// Compares the distributional normal derivatives of v^{+/-}[tau] against
  /// -tau/2 + Wt tau (interior) and tau/2 + Wt tau (exterior, 2-D only when
  /// <tau, 1> = 0), tested against 16 smooth functions.
  JumpResiduals dist_jump_check(const PairDistribution& tau) const {
    const Eigen::MatrixXd e = smooth_test_functions(mesh());
    const GridFunction trace = V_of_distribution(tau);
    const GridFunction rep = to_grid_representer(tau).representer;
    const GridFunction wt_rep = ops_->Wt().matrix * rep;
    auto tested = [&](const GridFunction& d) {
      return (e.transpose() * mesh().weights.cwiseProduct(d)).lpNorm<Eigen::Infinity>();
    };
    JumpResiduals r;
    const GridFunction lhs_int = to_grid_representer(dist_normal_derivative(trace, Side::plus)).representer;
    r.interior = tested(lhs_int - (-0.5 * rep + wt_rep));
    const double m = mass(tau);
    if (std::abs(m) > 1e-8 * std::max(1.0, length_ * rep.lpNorm<Eigen::Infinity>())) {
      r.note = "NoLimit: exterior branch needs <tau, 1> = 0 in 2-D";
      return r;
    }
    const GridFunction lhs_ext =
        -to_grid_representer(dist_normal_derivative(trace, Side::minus)).representer;
    r.exterior = tested(lhs_ext - (0.5 * rep + wt_rep));
    return r;
  }

  /// Operator T_side with V[S_side^t mu] = T_side mu on the boundary.
  Eigen::MatrixXd trace_operator(Side side) const {
    if (side == Side::plus) return ops_->half_identity_plus_W(-1.0);
    Eigen::MatrixXd t = -ops_->half_identity_plus_W(1.0);
    t.rowwise() += ops_->ansatz_constant_functional().transpose();
    return t;
  }

  /// Ker(sign I/2 + Wt) acting on distributions, computed in J coordinates
  /// and returned as grid representers (one column per basis vector).
  Eigen::MatrixXd wt_kernel_representers(double sign, double tol = kRankThreshold) const {
    const Index n = ops_->size();
    const Index q = static_cast<Index>(carriers_plus_.size());
    const Eigen::MatrixXd pinv = j_plus_->pseudo_inverse();
    Eigen::RowVectorXd carrier_mass(q);
    for (Index k = 0; k < q; ++k) carrier_mass[k] = integrate(mesh(), carriers_plus_[k]);
    const Eigen::RowVectorXd mass_row = carrier_mass * pinv.topRows(q);
    const auto& w = ops_->W().matrix;
    Eigen::MatrixXd t = w;
    t += (w * v_one_ - 0.5 * v_one_) * mass_row / length_;
    t.diagonal().array() += 0.5 * sign;
    const NumericalKernel ker = numerical_kernel(t, tol);
    Eigen::MatrixXd reps(n, ker.basis.cols());
    for (Index c = 0; c < ker.basis.cols(); ++c)
      reps.col(c) = to_grid_representer(J_inverse(ker.basis.col(c), Side::plus)).representer;
    return reps;
  }

  double boundary_length_value() const { return length_; }
  const GridFunction& v_of_one() const { return v_one_; }

 private:
  void check(const PairDistribution& tau) const {
    require_length(tau.mu0.size(), ops_->size(), "PairDistribution mu0");
    require_length(tau.mu1.size(), ops_->size(), "PairDistribution mu1");
  }

  // Columns: J of each mass carrier chi (as mu_0), then T_side (mu_1 part).
  Eigen::MatrixXd j_matrix(Side side) const {
    const auto& carriers = side == Side::plus ? carriers_plus_ : carriers_minus_;
    const Index n = ops_->size();
    const Index q = static_cast<Index>(carriers.size());
    Eigen::MatrixXd a(n, q + n);
    for (Index k = 0; k < q; ++k) {
      const double share = integrate(mesh(), carriers[k]) / length_;
      a.col(k) = ops_->V().matrix * carriers[k] - share * v_one_ + GridFunction::Constant(n, share);
    }
    a.rightCols(n) = trace_operator(side);
    return a;
  }

  OperatorsPtr ops_;
  double length_ = 0.0;
  GridFunction v_one_;
  Eigen::MatrixXd splus_t_, sminus_t_;
  std::vector<GridFunction> carriers_plus_, carriers_minus_;
  std::unique_ptr<MinNormSolver> j_plus_, j_minus_;
};

}  // namespace layerpot
