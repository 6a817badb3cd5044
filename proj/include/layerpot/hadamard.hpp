#pragma once

// Hadamard's lacunary example on the unit disk: the trace
// g_K = sum_{k<=K} k^-2 cos(2^k theta) has bounded partial sums but Dirichlet
// energy pi sum 2^k k^-4, which diverges as K grows. The nonvariational
// Neumann problem with the distributional normal derivative of g_K still
// recovers the harmonic extension.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerpot/distributions.hpp"
#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/io.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/solvers.hpp"

namespace layerpot {

/// Smallest admissible node count for K terms: 8 nodes per period of the
/// highest mode 2^K.
inline Index hadamard_required_nodes(int terms) { return Index{8} << terms; }

struct EnergyRow {
  int k = 0;
  double analytic = 0.0;
  /// <g_k, S_+ g_k> from the discrete Steklov operator.
  double steklov_form = 0.0;
  Index required_nodes = 0;
};

struct HadamardReport {
  int terms = 0;
  Index nodes = 0;
  double probe_radius = 0.5;
  double recovery_error = 0.0;
  double equation_residual = 0.0;
  std::vector<EnergyRow> energy;

  bool energy_monotone() const {
    for (std::size_t i = 1; i < energy.size(); ++i)
      if (!(energy[i].analytic > energy[i - 1].analytic)) return false;
    return true;
  }
};

/// pi sum_{j<=k} 2^j j^-4.
inline double hadamard_energy(int k) {
  double e = 0.0;
  for (int j = 1; j <= k; ++j) e += std::ldexp(1.0, j) / std::pow(static_cast<double>(j), 4);
  return std::numbers::pi * e;
}

/// sum_{k<=K} k^-2 r^{2^k} cos(2^k theta).
inline double hadamard_extension(int terms, double r, double theta) {
  double s = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double m = std::ldexp(1.0, k);
    s += std::pow(r, m) * std::cos(m * theta) / (static_cast<double>(k) * k);
  }
  return s;
}

inline HadamardReport demo_hadamard(int terms, Index nodes) {
  require(terms >= 1, ErrorKind::ConfigError, "terms: K must be at least 1");
  if (nodes < hadamard_required_nodes(terms)) {
    throw Error(ErrorKind::ConfigError, "n: K=" + std::to_string(terms) + " needs N >= " +
                                            std::to_string(hadamard_required_nodes(terms)) + ", got " +
                                            std::to_string(nodes));
  }
  HadamardReport rep;
  rep.terms = terms;
  rep.nodes = nodes;
  const auto ops = make_operators(build_mesh({CurveSpec::circle(Point::Zero(), 1.0)}, nodes));
  const DistributionSpace ds(ops);
  const BoundaryMesh& mesh = ops->mesh();

  auto trace = [&](int k) {
    return sample(mesh, [&](const Point& p) { return hadamard_trace(k, std::atan2(p.y(), p.x())); });
  };
  const GridFunction g = trace(terms);
  const SolveReport sol = neumann_interior(ds, DistributionSpace::dist_normal_derivative(g, Side::plus));
  rep.equation_residual = sol.equation_residual;

  constexpr Index kProbes = 64;
  const Points ring = probe_circle(rep.probe_radius, kProbes);
  const Eigen::VectorXd u = sol.solution.evaluate(ring);
  Eigen::VectorXd diff(kProbes);
  for (Index i = 0; i < kProbes; ++i)
    diff[i] = u[i] - hadamard_extension(terms, rep.probe_radius, std::atan2(ring(1, i), ring(0, i)));
  rep.recovery_error = (diff.array() - diff.mean()).abs().maxCoeff();

  const auto& splus = ops->steklov(Side::plus).matrix;
  for (int k = 1; k <= terms; ++k) {
    const GridFunction gk = trace(k);
    rep.energy.push_back({k, hadamard_energy(k), pairing(mesh, gk, splus * gk), hadamard_required_nodes(k)});
  }
  return rep;
}

inline nlohmann::json to_json(const HadamardReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : r.energy)
    rows.push_back({{"k", e.k},
                    {"energy_analytic", e.analytic},
                    {"energy_steklov", e.steklov_form},
                    {"required_nodes", e.required_nodes}});
  return {{"terms", r.terms},
          {"nodes", r.nodes},
          {"probe_radius", r.probe_radius},
          {"recovery_error", r.recovery_error},
          {"equation_residual", r.equation_residual},
          {"energy_monotone", r.energy_monotone()},
          {"energy", rows}};
}

inline void write_energy_csv(const HadamardReport& r, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path);
  out << "k,energy_analytic,energy_steklov,required_nodes\n";
  for (const auto& e : r.energy)
    out << e.k << ',' << format_double(e.analytic) << ',' << format_double(e.steklov_form) << ','
        << e.required_nodes << '\n';
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed for " + path);
}

}  // namespace layerpot
