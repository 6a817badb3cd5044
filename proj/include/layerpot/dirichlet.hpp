#pragma once

// Interior and exterior Dirichlet problems through the constant-augmented
// single-layer ansatz, Green-function correctors h_x and the Poisson
// integral representations built on them.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/kernels.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/potentials.hpp"

namespace layerpot {

struct SolveReport {
  std::string problem;
  HarmonicField solution;
  std::map<std::string, GridFunction> densities;
  double equation_residual = 0.0;
  double boundary_residual = 0.0;
  std::vector<double> compat_values;
  std::optional<Index> rank;
  std::optional<Index> expected_rank_deficiency;
  std::optional<double> value_at_infinity;
  std::optional<double> infinity_probe_mean;
  std::optional<double> cross_check;
  std::vector<std::string> notes;
};

/// Boundary residual tolerance of the Dirichlet solvers, relative to max|g|.
inline constexpr double kDirichletTolerance = 1e-7;

namespace detail {

inline SolveReport dirichlet_by_ansatz(const BoundaryOperators& ops, const GridFunction& g,
                                       Region region) {
  require_length(g.size(), ops.size(), "dirichlet");
  const SingleLayerAnsatz a = ops.solve_ansatz(g);
  SolveReport r;
  r.problem = region == Region::interior ? "dirichlet-int" : "dirichlet-ext";
  r.solution.mesh = ops.mesh_ptr();
  r.solution.region = region;
  r.solution.add_single(a.density);
  r.solution.constant = a.constant;
  r.densities["eta"] = a.density;
  const GridFunction trace = ops.V().matrix * a.density + GridFunction::Constant(g.size(), a.constant);
  r.boundary_residual = (trace - g).lpNorm<Eigen::Infinity>();
  r.equation_residual = std::max(r.boundary_residual, std::abs(integrate(ops.mesh(), a.density)));
  if (region == Region::exterior) {
    r.value_at_infinity = a.constant;
    r.solution.value_at_infinity = a.constant;
  }
  const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  if (!(r.equation_residual <= kDirichletTolerance * scale)) {
    throw Error(ErrorKind::SingularSystem, "Dirichlet ansatz residual " +
                                               std::to_string(r.equation_residual) +
                                               " exceeds tolerance");
  }
  return r;
}

}  // namespace detail

/// u = v^+[eta] + c with V eta + c = g and <eta, 1> = 0.
inline SolveReport dirichlet_interior(const BoundaryOperators& ops, const GridFunction& g) {
  return detail::dirichlet_by_ansatz(ops, g, Region::interior);
}

/// u = v^-[eta] + c, bounded at infinity with limit c.
inline SolveReport dirichlet_exterior(const BoundaryOperators& ops, const GridFunction& g) {
  SolveReport r = detail::dirichlet_by_ansatz(ops, g, Region::exterior);
  const double reach = ops.mesh().nodes.colwise().norm().maxCoeff();
  const InfinityValue inf = value_at_infinity(r.solution, 2.0 * reach + 1.0);
  r.infinity_probe_mean = inf.quadrature_mean;
  return r;
}

/// Boundary data y -> S_2(x - y) of the Green-function corrector h_x.
inline GridFunction green_data(const BoundaryMesh& mesh, const Point& x) {
  return sample(mesh, [&](const Point& y) { return kernel2d::log_kernel(x - y); });
}

/// h_x (interior) or h_{x-} (exterior): the harmonic function with boundary
/// values S_2(x - .), bounded at infinity in the exterior case.
inline HarmonicField green_h(const BoundaryOperators& ops, const Point& x, Region side) {
  Points p(2, 1);
  p.col(0) = x;
  detail::require_off_boundary(ops.mesh(), p);
  const GridFunction data = green_data(ops.mesh(), x);
  return detail::dirichlet_by_ansatz(ops, data, side).solution;
}

struct PoissonValue {
  double value = 0.0;
  /// c_g: limit at infinity of the exterior Dirichlet solution (exterior only).
  double constant = 0.0;
};

namespace detail {

// sum_i w_i g_i d/dnu_y (S_2(x - y) - h(y)) at y = y_i, with the normal
// derivative of h taken from its ansatz density on the requested side.
inline double poisson_integral(const BoundaryOperators& ops, const GridFunction& g,
                               const Point& x, Side side) {
  require_length(g.size(), ops.size(), "poisson");
  const BoundaryMesh& m = ops.mesh();
  Points p(2, 1);
  p.col(0) = x;
  require_off_boundary(m, p);
  const SingleLayerAnsatz h = ops.solve_ansatz(green_data(m, x));
  const GridFunction dh = normal_derivative_single(ops, h.density, side);
  double s = 0.0;
  for (Index i = 0; i < m.size(); ++i) {
    const double dS = kernel2d::double_layer(x, m.nodes.col(i), m.normals.col(i));
    s += m.weights[i] * g[i] * (dS - dh[i]);
  }
  return s;
}

}  // namespace detail

/// Interior Poisson integral of g at x. Equals the interior Dirichlet solution
/// for x in the domain and vanishes for x in the exterior.
inline double poisson_interior(const BoundaryOperators& ops, const GridFunction& g,
                               const Point& x) {
  return detail::poisson_integral(ops, g, x, Side::plus);
}

/// Exterior Poisson integral -int g d/dnu (S_2(x - .) - h_{x-}) + c_g. Equals
/// the exterior Dirichlet solution for x in the exterior and vanishes for x in
/// the domain.
inline PoissonValue poisson_exterior(const BoundaryOperators& ops, const GridFunction& g,
                                     const Point& x) {
  PoissonValue v;
  v.constant = ops.solve_ansatz(g).constant;
  v.value = -detail::poisson_integral(ops, g, x, Side::minus) + v.constant;
  return v;
}

}  // namespace layerpot
