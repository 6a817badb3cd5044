#pragma once

// Nonvariational Neumann problems, compatibility conditions, null spaces of
// +/- I/2 + W and their transposes, image/kernel splittings, and the Dirichlet
// solvers written as double layer + single layer (+ constant).

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "layerpot/dirichlet.hpp"
#include "layerpot/distributions.hpp"
#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/linalg.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/potentials.hpp"

namespace layerpot {

/// Compatibility is declared when every pairing is at most this fraction of
/// int |g| dsigma; the least-squares residual is held to the same bound.
inline constexpr double kCompatTolerance = 1e-7;

struct CompatResult {
  std::vector<double> values;
  bool compatible = true;
};

namespace detail {

inline CompatResult compat_against(const BoundaryMesh& mesh, const std::vector<GridFunction>& masks,
                                   const GridFunction& g) {
  require_length(g.size(), mesh.size(), "compatibility check");
  CompatResult r;
  const double scale = integrate(mesh, g.cwiseAbs());
  for (const auto& chi : masks) {
    const double v = pairing(mesh, g, chi);
    r.values.push_back(v);
    if (std::abs(v) > kCompatTolerance * scale) r.compatible = false;
  }
  return r;
}

inline std::string format_values(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v[i]);
    s += (i ? ", " : "") + std::string(buf);
  }
  return s + "]";
}

}  // namespace detail

/// <g, chi_{dOmega_j}>, j = 1..kappa_plus.
inline CompatResult check_compat_interior(const BoundaryMesh& mesh, const DomainTopology& topo,
                                          const GridFunction& g) {
  return detail::compat_against(mesh, topo.omega_masks, g);
}

/// <g, chi_{d(Omega^-)_j}> for j = 1..kappa_minus followed, in 2-D, by the
/// unbounded component j = 0.
inline CompatResult check_compat_exterior(const BoundaryMesh& mesh, const DomainTopology& topo,
                                          const GridFunction& g, bool planar = true) {
  std::vector<GridFunction> masks(topo.omega_minus_masks.begin() + 1, topo.omega_minus_masks.end());
  if (planar) masks.push_back(topo.omega_minus_masks.front());
  return detail::compat_against(mesh, masks, g);
}

namespace detail {

inline void require_compatible(const CompatResult& c, const char* which) {
  if (!c.compatible) {
    throw Error(ErrorKind::IncompatibleData,
                std::string(which) + " Neumann data violates the compatibility conditions; <g, chi> = " +
                    format_values(c.values),
                c.values);
  }
}

// Pairs (S_side^t trace) and g with the smooth test functions; max discrepancy.
inline double neumann_flux_check(const DistributionSpace& ds, const GridFunction& trace,
                                 const GridFunction& g, Side side, double sign) {
  const Eigen::MatrixXd e = smooth_test_functions(ds.mesh());
  const GridFunction rep = sign * (ds.steklov_transpose(side) * trace);
  return (e.transpose() * ds.mesh().weights.cwiseProduct(rep - g)).lpNorm<Eigen::Infinity>();
}

}  // namespace detail

/// Interior Neumann problem du/dnu = g (g given by its grid representer):
/// u = v^+[phi] with (-I/2 + Wt) phi = g by minimum-norm least squares. The
/// solution is unique up to functions constant on each component of the
/// domain; no normalization is imposed.
inline SolveReport neumann_interior(const DistributionSpace& ds, const GridFunction& g) {
  const BoundaryOperators& ops = ds.operators();
  require_length(g.size(), ops.size(), "neumann_interior");
  SolveReport r;
  r.problem = "neumann-int";
  const CompatResult compat = check_compat_interior(ops.mesh(), ops.topology(), g);
  r.compat_values = compat.values;
  detail::require_compatible(compat, "interior");

  const MinNormSolver solver(ops.half_identity_plus_Wt(-1.0));
  const LeastSquares ls = solver.solve(g);
  const double gscale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if (!(ls.residual <= kCompatTolerance * gscale)) {
    throw Error(ErrorKind::IncompatibleData,
                "interior Neumann least-squares residual " + std::to_string(ls.residual) +
                    " exceeds tolerance",
                compat.values);
  }
  r.rank = ls.rank;
  r.expected_rank_deficiency = ops.topology().kappa_plus;
  if (ops.size() - ls.rank != ops.topology().kappa_plus)
    r.notes.push_back("rank deficiency differs from kappa_plus");
  r.equation_residual = ls.residual;
  r.densities["phi"] = ls.solution;
  r.solution.mesh = ops.mesh_ptr();
  r.solution.region = Region::interior;
  r.solution.add_single(ls.solution);

  const GridFunction trace = ops.V().matrix * ls.solution;
  r.boundary_residual = detail::neumann_flux_check(ds, trace, g, Side::plus, 1.0);
  if (!(r.boundary_residual <= 1e-6 * gscale)) {
    throw Error(ErrorKind::NumericalFailure,
                "distributional normal derivative of the solution misses the data by " +
                    std::to_string(r.boundary_residual));
  }
  return r;
}

inline SolveReport neumann_interior(const DistributionSpace& ds, const PairDistribution& g) {
  return neumann_interior(ds, ds.to_grid_representer(g).representer);
}

/// Exterior Neumann problem -du/dnu_{Omega^-} = g, harmonic at infinity:
/// u = v^-[phi] with (I/2 + Wt) phi = g. In 2-D <phi, 1> = <g, 1> = 0, so the
/// single layer has the limit 0 at infinity.
inline SolveReport neumann_exterior(const DistributionSpace& ds, const GridFunction& g) {
  const BoundaryOperators& ops = ds.operators();
  require_length(g.size(), ops.size(), "neumann_exterior");
  SolveReport r;
  r.problem = "neumann-ext";
  const CompatResult compat = check_compat_exterior(ops.mesh(), ops.topology(), g);
  r.compat_values = compat.values;
  detail::require_compatible(compat, "exterior");

  const MinNormSolver solver(ops.half_identity_plus_Wt(1.0));
  const LeastSquares ls = solver.solve(g);
  const double gscale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if (!(ls.residual <= kCompatTolerance * gscale)) {
    throw Error(ErrorKind::IncompatibleData,
                "exterior Neumann least-squares residual " + std::to_string(ls.residual) +
                    " exceeds tolerance",
                compat.values);
  }
  r.rank = ls.rank;
  r.expected_rank_deficiency = ops.topology().kappa_minus;
  if (ops.size() - ls.rank != ops.topology().kappa_minus)
    r.notes.push_back("rank deficiency differs from kappa_minus");
  r.equation_residual = ls.residual;
  const double phi_mass = integrate(ops.mesh(), ls.solution);
  if (!(std::abs(phi_mass) <= 1e-8 * gscale * std::max(1.0, boundary_length(ops.mesh())))) {
    throw Error(ErrorKind::NumericalFailure,
                "exterior Neumann density has nonzero mass " + std::to_string(phi_mass));
  }
  r.densities["phi"] = ls.solution;
  r.solution.mesh = ops.mesh_ptr();
  r.solution.region = Region::exterior;
  r.solution.add_single(ls.solution);
  r.solution.value_at_infinity = 0.0;
  r.value_at_infinity = 0.0;
  const double reach = ops.mesh().nodes.colwise().norm().maxCoeff();
  r.infinity_probe_mean = value_at_infinity(r.solution, 2.0 * reach + 1.0).quadrature_mean;

  const GridFunction trace = ops.V().matrix * ls.solution;
  r.boundary_residual = detail::neumann_flux_check(ds, trace, g, Side::minus, -1.0);
  if (!(r.boundary_residual <= 1e-6 * gscale)) {
    throw Error(ErrorKind::NumericalFailure,
                "distributional normal derivative of the solution misses the data by " +
                    std::to_string(r.boundary_residual));
  }
  return r;
}

inline SolveReport neumann_exterior(const DistributionSpace& ds, const PairDistribution& g) {
  return neumann_exterior(ds, ds.to_grid_representer(g).representer);
}

enum class HalfOperator { half_plus_W, minus_half_plus_W, half_plus_Wt, minus_half_plus_Wt };

constexpr std::string_view to_string(HalfOperator k) {
  switch (k) {
    case HalfOperator::half_plus_W: return "I/2+W";
    case HalfOperator::minus_half_plus_W: return "-I/2+W";
    case HalfOperator::half_plus_Wt: return "I/2+Wt";
    case HalfOperator::minus_half_plus_Wt: return "-I/2+Wt";
  }
  return "?";
}

inline Eigen::MatrixXd half_operator(const BoundaryOperators& ops, HalfOperator k) {
  switch (k) {
    case HalfOperator::half_plus_W: return ops.half_identity_plus_W(1.0);
    case HalfOperator::minus_half_plus_W: return ops.half_identity_plus_W(-1.0);
    case HalfOperator::half_plus_Wt: return ops.half_identity_plus_Wt(1.0);
    case HalfOperator::minus_half_plus_Wt: return ops.half_identity_plus_Wt(-1.0);
  }
  return {};
}

struct NullspaceBasis {
  Eigen::MatrixXd basis;
  Eigen::VectorXd small_singular_values;
  double gap_ratio = 0.0;
  /// kappa_minus for I/2 + W(t), kappa_plus for -I/2 + W(t).
  int expected_dimension = 0;
  bool conditioning_warning = false;

  Index dimension() const { return basis.cols(); }
};

inline NullspaceBasis nullspace(const BoundaryOperators& ops, HalfOperator kind,
                                double tol = kRankThreshold) {
  const NumericalKernel k = numerical_kernel(half_operator(ops, kind), tol);
  NullspaceBasis b;
  b.basis = k.basis;
  b.small_singular_values = k.small_singular_values;
  b.gap_ratio = k.gap_ratio;
  const bool plus = kind == HalfOperator::half_plus_W || kind == HalfOperator::half_plus_Wt;
  b.expected_dimension = plus ? ops.topology().kappa_minus : ops.topology().kappa_plus;
  b.conditioning_warning = b.gap_ratio < 1e4;
  return b;
}

struct Decomposition {
  GridFunction image_part;
  GridFunction kernel_part;
  GridFunction preimage;  // x with (sign I/2 + W) x = image_part
  double residual = 0.0;
};

/// g = g_im + g_ker with g_ker in Ker(sign I/2 + W) and g_im in the image,
/// i.e. weighted-orthogonal to Ker(sign I/2 + Wt). The projection is oblique
/// in general.
inline Decomposition decompose(const BoundaryOperators& ops, const GridFunction& g, Side sign) {
  require_length(g.size(), ops.size(), "decompose");
  const double s = sign == Side::plus ? 1.0 : -1.0;
  const HalfOperator kw = sign == Side::plus ? HalfOperator::half_plus_W : HalfOperator::minus_half_plus_W;
  const HalfOperator kt = sign == Side::plus ? HalfOperator::half_plus_Wt : HalfOperator::minus_half_plus_Wt;
  const Eigen::MatrixXd ker = nullspace(ops, kw).basis;
  const Eigen::MatrixXd coker = nullspace(ops, kt).basis;
  require(ker.cols() == coker.cols(), ErrorKind::SingularSystem,
          "kernel and transpose kernel dimensions differ");

  Decomposition d;
  const auto& w = ops.mesh().weights;
  if (ker.cols() > 0) {
    const Eigen::MatrixXd gram = coker.transpose() * w.asDiagonal() * ker;
    const Eigen::VectorXd rhs = coker.transpose() * w.cwiseProduct(g);
    const Eigen::VectorXd a = gram.fullPivLu().solve(rhs);
    d.kernel_part = ker * a;
  } else {
    d.kernel_part = GridFunction::Zero(g.size());
  }
  d.image_part = g - d.kernel_part;
  const LeastSquares ls = min_norm_solve(ops.half_identity_plus_W(s), d.image_part);
  d.preimage = ls.solution;
  d.residual = ls.residual;
  if (!(d.residual <= 1e-7 * std::max(1.0, g.lpNorm<Eigen::Infinity>()))) {
    throw Error(ErrorKind::SingularSystem,
                "image component not reached: residual " + std::to_string(d.residual));
  }
  return d;
}

/// Maximum discrepancy of two fields at the given points.
inline double field_discrepancy(const HarmonicField& a, const HarmonicField& b, const Points& p) {
  return (a.evaluate(p) - b.evaluate(p)).lpNorm<Eigen::Infinity>();
}

inline constexpr double kCrossSolverTolerance = 1e-6;

/// Interior Dirichlet problem as u = w^+[psi] + v^+[mu]: psi solves
/// (I/2 + W) psi = g_im and mu in Ker(I/2 + Wt) solves V mu = g_ker.
/// Cross-checked against dirichlet_interior at interior probes.
inline SolveReport dirichlet_interior_viapaper(const BoundaryOperators& ops, const GridFunction& g) {
  const Decomposition d = decompose(ops, g, Side::plus);
  const Eigen::MatrixXd ker_t = nullspace(ops, HalfOperator::half_plus_Wt).basis;
  GridFunction mu = GridFunction::Zero(g.size());
  double ker_residual = 0.0;
  if (ker_t.cols() > 0) {
    const LeastSquares ls = min_norm_solve(ops.V().matrix * ker_t, d.kernel_part);
    mu = ker_t * ls.solution;
    ker_residual = ls.residual;
  }
  SolveReport r;
  r.problem = "dirichlet-int-viapaper";
  r.solution.mesh = ops.mesh_ptr();
  r.solution.region = Region::interior;
  r.solution.add_double(d.preimage).add_single(mu);
  r.densities["psi"] = d.preimage;
  r.densities["mu"] = mu;
  const GridFunction trace = trace_double(ops, d.preimage, Side::plus) + ops.V().matrix * mu;
  r.boundary_residual = (trace - g).lpNorm<Eigen::Infinity>();
  r.equation_residual = std::max(d.residual, ker_residual);
  const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if (!(r.boundary_residual <= 1e-6 * scale)) {
    throw Error(ErrorKind::SingularSystem,
                "double+single layer representation misses the data by " +
                    std::to_string(r.boundary_residual));
  }
  const Points probes = probe_points(ops.mesh(), Region::interior, 10, 0.2);
  r.cross_check = field_discrepancy(r.solution, dirichlet_interior(ops, g).solution, probes);
  if (*r.cross_check > kCrossSolverTolerance * scale)
    r.notes.push_back("cross-solver check against dirichlet_interior failed");
  return r;
}

/// Exterior Dirichlet problem as u = w^-[psi] + v^-[mu] + c: psi solves
/// (-I/2 + W) psi = g_im, mu ranges over the zero-mass part of
/// Ker(-I/2 + Wt) and, with c, matches g_ker.
inline SolveReport dirichlet_exterior_viapaper(const BoundaryOperators& ops, const GridFunction& g) {
  const Decomposition d = decompose(ops, g, Side::minus);
  const Eigen::MatrixXd ker_t = nullspace(ops, HalfOperator::minus_half_plus_Wt).basis;
  const Index q = ker_t.cols();
  const Index n = ops.size();
  // Unknowns (b, c): V ker_t b + c = g_ker, <ker_t b, 1> = 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, q + 1);
  a.topLeftCorner(n, q) = ops.V().matrix * ker_t;
  a.topRightCorner(n, 1).setOnes();
  a.bottomLeftCorner(1, q) = ops.mesh().weights.transpose() * ker_t;
  Eigen::VectorXd rhs(n + 1);
  rhs << d.kernel_part, 0.0;
  const LeastSquares ls = min_norm_solve(a, rhs);
  const GridFunction mu = ker_t * ls.solution.head(q);
  const double c = ls.solution[q];

  SolveReport r;
  r.problem = "dirichlet-ext-viapaper";
  r.solution.mesh = ops.mesh_ptr();
  r.solution.region = Region::exterior;
  r.solution.add_double(d.preimage).add_single(mu);
  r.solution.constant = c;
  r.solution.value_at_infinity = c;
  r.value_at_infinity = c;
  r.densities["psi"] = d.preimage;
  r.densities["mu"] = mu;
  const GridFunction trace =
      trace_double(ops, d.preimage, Side::minus) + ops.V().matrix * mu + GridFunction::Constant(n, c);
  r.boundary_residual = (trace - g).lpNorm<Eigen::Infinity>();
  r.equation_residual = std::max(d.residual, ls.residual);
  const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if (!(r.boundary_residual <= 1e-6 * scale)) {
    throw Error(ErrorKind::SingularSystem,
                "double+single layer representation misses the data by " +
                    std::to_string(r.boundary_residual));
  }
  const Points probes = probe_points(ops.mesh(), Region::exterior, 10, 0.2);
  r.cross_check = field_discrepancy(r.solution, dirichlet_exterior(ops, g).solution, probes);
  if (*r.cross_check > kCrossSolverTolerance * scale)
    r.notes.push_back("cross-solver check against dirichlet_exterior failed");
  const double reach = ops.mesh().nodes.colwise().norm().maxCoeff();
  r.infinity_probe_mean = value_at_infinity(r.solution, 2.0 * reach + 1.0).quadrature_mean;
  return r;
}

}  // namespace layerpot
