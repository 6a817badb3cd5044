#pragma once

// Command implementations behind the `layerpot` executable. Each command
// returns the process exit code:
//   0 success, 1 verify failures, 2 configuration, 3 incompatible data,
//   4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "layerpot/dirichlet.hpp"
#include "layerpot/distributions.hpp"
#include "layerpot/error.hpp"
#include "layerpot/hadamard.hpp"
#include "layerpot/io.hpp"
#include "layerpot/solvers.hpp"
#include "layerpot/verify.hpp"

namespace layerpot {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitIncompatible = 3, kExitNumerical = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
    case ErrorKind::InvalidGeometry:
    case ErrorKind::OutOfRange:
    case ErrorKind::LengthMismatch: return kExitConfig;
    case ErrorKind::IncompatibleData: return kExitIncompatible;
    default: return kExitNumerical;
  }
}

struct SolveArgs {
  std::string config;
  std::optional<std::string> problem;
  std::optional<std::string> data;
  std::optional<Index> nodes;
  std::optional<std::string> out;
  /// Directory for CSV dumps of V, W, Wt, S_+ and S_-.
  std::optional<std::string> dump_operators;
};

struct VerifyArgs {
  std::optional<std::string> config;
  std::optional<Index> nodes;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> out;
  /// Test hook: assemble W with the wrong diagonal sign.
  bool flip_diagonal_sign = false;
};

struct HadamardArgs {
  int terms = 1;
  std::optional<Index> nodes;
  std::optional<std::string> out;
};

namespace detail {

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path.string());
  out << std::setw(2) << j << '\n';
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed for " + path.string());
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::IoError, "cannot create output directory " + dir);
  return dir;
}

inline SolveReport run_problem(Problem p, const OperatorsPtr& ops, const DataSpec& spec, std::ostream& log) {
  const BoundaryMesh& mesh = ops->mesh();
  const GridFunction g = make_data(mesh, spec);
  switch (p) {
    case Problem::dirichlet_int: {
      SolveReport r = dirichlet_interior(*ops, g);
      r.cross_check = dirichlet_interior_viapaper(*ops, g).cross_check;
      log << "cross-solver check: max probe discrepancy " << *r.cross_check << '\n';
      return r;
    }
    case Problem::dirichlet_ext: {
      SolveReport r = dirichlet_exterior(*ops, g);
      r.cross_check = dirichlet_exterior_viapaper(*ops, g).cross_check;
      log << "cross-solver check: max probe discrepancy " << *r.cross_check << '\n';
      return r;
    }
    case Problem::neumann_int: {
      const DistributionSpace ds(ops);
      if (spec.kind == DataSpec::Kind::hadamard)
        return neumann_interior(ds, DistributionSpace::dist_normal_derivative(g, Side::plus));
      return neumann_interior(ds, g);
    }
    case Problem::neumann_ext: return neumann_exterior(DistributionSpace(ops), g);
    default:
      throw Error(ErrorKind::ConfigError, "problem: " + std::string(to_string(p)) +
                                              " is a separate subcommand, not a solve problem");
  }
}

}  // namespace detail

inline int cmd_solve(const SolveArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    RunConfig cfg = load_config(args.config);
    if (args.problem) cfg.problem = parse_problem(*args.problem);
    if (args.data) cfg.data = parse_data_spec(*args.data);
    if (args.nodes) std::fill(cfg.nodes.begin(), cfg.nodes.end(), *args.nodes);
    if (args.out) cfg.output = *args.out;
    validate(cfg);
    require(cfg.problem.has_value(), ErrorKind::ConfigError, "problem: not given");
    require(cfg.data.has_value(), ErrorKind::ConfigError, "data: not given");

    const auto ops = make_operators(build_mesh(cfg.curves, cfg.nodes));
    const auto dir = detail::prepare_dir(cfg.output);
    if (args.dump_operators) {
      const auto ddir = detail::prepare_dir(*args.dump_operators);
      for (const OperatorMatrix* op : {&ops->V(), &ops->W(), &ops->Wt(), &ops->steklov(Side::plus),
                                       &ops->steklov(Side::minus)})
        dump_csv(*op, (ddir / (std::string(to_string(op->kind)) + ".csv")).string());
    }

    SolveReport report;
    try {
      report = detail::run_problem(*cfg.problem, ops, *cfg.data, out);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IncompatibleData) {
        err << "incompatible data: " << e.what() << '\n';
        err << "pairings <g, chi>:";
        for (double v : e.values()) err << ' ' << format_double(v);
        err << '\n';
      }
      throw;
    }
    const double scale = std::max(1.0, make_data(ops->mesh(), *cfg.data).lpNorm<Eigen::Infinity>());
    if (!(report.equation_residual <= cfg.tolerance * scale)) {
      throw Error(ErrorKind::NumericalFailure, "equation residual " + std::to_string(report.equation_residual) +
                                                   " exceeds tolerance " + std::to_string(cfg.tolerance));
    }
    nlohmann::json j = to_json(report);
    j["nodes"] = ops->size();
    if (cfg.alpha) j["alpha"] = *cfg.alpha;
    detail::write_json(j, dir / "report.json");
    write_field_csv(report.solution, default_grid(ops->mesh(), report.solution.region),
                    (dir / "field.csv").string());
    out << report.problem << ": equation residual " << report.equation_residual << ", wrote "
        << (dir / "report.json").string() << " and " << (dir / "field.csv").string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IncompatibleData) err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

inline void print_verify(const VerifyReport& r, std::ostream& out) {
  out << "seed " << r.seed << ", N = " << r.nodes << '\n';
  for (const auto& row : r.rows) {
    out << (row.pass ? "PASS " : "FAIL ") << std::left << std::setw(10) << row.geometry << std::setw(24)
        << row.name << std::right << std::scientific << std::setprecision(3) << std::setw(11) << row.residual
        << " <= " << std::setprecision(0) << row.tolerance << std::defaultfloat << std::setprecision(6);
    if (!row.detail.empty()) out << "  " << row.detail;
    out << '\n';
  }
  out << "overall: " << (r.pass() ? "PASS" : "FAIL") << '\n';
}

inline int cmd_verify(const VerifyArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    std::vector<StockGeometry> geos;
    if (args.config) {
      const RunConfig cfg = load_config(*args.config);
      geos.push_back({std::filesystem::path(*args.config).stem().string(), cfg.curves});
    }
    VerifyOptions opts;
    opts.seed = args.seed;
    if (args.nodes) opts.nodes = *args.nodes;
    if (args.flip_diagonal_sign) {
      opts.assembly.flip_diagonal_sign = true;
      opts.assembly.enforce_half_identity = false;
    }
    const VerifyReport rep = run_verify(geos, opts);
    print_verify(rep, out);
    if (args.out) detail::write_json(to_json(rep), detail::prepare_dir(*args.out) / "verify_report.json");
    return rep.pass() ? kExitOk : kExitVerifyFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

inline int cmd_demo_hadamard(const HadamardArgs& args, std::ostream& out = std::cout,
                             std::ostream& err = std::cerr) {
  try {
    const Index n = args.nodes.value_or(std::max<Index>(256, hadamard_required_nodes(args.terms)));
    const HadamardReport rep = demo_hadamard(args.terms, n);
    out << "K = " << rep.terms << ", N = " << rep.nodes << ", recovery error at r = " << rep.probe_radius
        << ": " << rep.recovery_error << '\n';
    out << "k  energy (pi sum 2^j j^-4)  <g_k, S_+ g_k>  N required\n";
    for (const auto& e : rep.energy) {
      out << e.k << "  " << format_double(e.analytic) << "  " << format_double(e.steklov_form) << "  "
          << e.required_nodes << '\n';
    }
    out << "energy monotone: " << (rep.energy_monotone() ? "yes" : "no") << '\n';
    if (args.out) {
      const auto dir = detail::prepare_dir(*args.out);
      detail::write_json(to_json(rep), dir / "hadamard_report.json");
      write_energy_csv(rep, (dir / "hadamard_energy.csv").string());
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

}  // namespace layerpot
