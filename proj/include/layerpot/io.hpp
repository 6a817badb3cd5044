#pragma once

// Run configuration (JSON domain files), boundary data specifications, JSON
// serialization of reports and CSV field output.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerpot/dirichlet.hpp"
#include "layerpot/distributions.hpp"
#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/potentials.hpp"

namespace layerpot {

enum class Problem { dirichlet_int, dirichlet_ext, neumann_int, neumann_ext, verify, demo_hadamard };

constexpr std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::dirichlet_int: return "dirichlet-int";
    case Problem::dirichlet_ext: return "dirichlet-ext";
    case Problem::neumann_int: return "neumann-int";
    case Problem::neumann_ext: return "neumann-ext";
    case Problem::verify: return "verify";
    case Problem::demo_hadamard: return "demo-hadamard";
  }
  return "?";
}

inline Problem parse_problem(const std::string& s) {
  for (Problem p : {Problem::dirichlet_int, Problem::dirichlet_ext, Problem::neumann_int,
                    Problem::neumann_ext, Problem::verify, Problem::demo_hadamard}) {
    if (s == to_string(p)) return p;
  }
  throw Error(ErrorKind::ConfigError, "problem: unknown problem '" + s + "'");
}

/// Boundary data: `constant:c`, `fourier:k` (cos k theta, theta the polar
/// angle about the origin), `indicator:j` (curve j, 0-based), `hadamard:K`
/// or `csv:path` (one value per node, in mesh order).
struct DataSpec {
  enum class Kind { constant, fourier, indicator, hadamard, csv };
  Kind kind = Kind::constant;
  double value = 0.0;
  int index = 0;
  std::string path;
};

inline DataSpec parse_data_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw Error(ErrorKind::ConfigError, "data: expected <kind>:<argument>, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  DataSpec d;
  try {
    std::size_t used = 0;
    if (kind == "constant") {
      d.kind = DataSpec::Kind::constant;
      d.value = std::stod(arg, &used);
    } else if (kind == "fourier" || kind == "indicator" || kind == "hadamard") {
      d.kind = kind == "fourier"     ? DataSpec::Kind::fourier
               : kind == "indicator" ? DataSpec::Kind::indicator
                                     : DataSpec::Kind::hadamard;
      d.index = std::stoi(arg, &used);
    } else if (kind == "csv") {
      d.kind = DataSpec::Kind::csv;
      d.path = arg;
      used = arg.size();
    } else {
      throw Error(ErrorKind::ConfigError, "data: unknown data kind '" + kind + "'");
    }
    if (used != arg.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ConfigError, "data: malformed argument in '" + text + "'");
  }
  if (d.kind == DataSpec::Kind::hadamard && d.index < 1)
    throw Error(ErrorKind::ConfigError, "data: hadamard needs K >= 1");
  return d;
}

struct RunConfig {
  std::vector<CurveSpec> curves;
  std::vector<Index> nodes;
  std::optional<Problem> problem;
  std::optional<DataSpec> data;
  double tolerance = 1e-7;
  /// Hoelder exponent; metadata only.
  std::optional<double> alpha;
  std::string output = ".";
};

inline constexpr Index kDefaultNodes = 128;

/// Hadamard data is only meaningful for the interior problems.
inline void validate(const RunConfig& cfg) {
  if (cfg.data && cfg.problem && cfg.data->kind == DataSpec::Kind::hadamard &&
      *cfg.problem != Problem::neumann_int && *cfg.problem != Problem::dirichlet_int) {
    throw Error(ErrorKind::ConfigError, "data: hadamard data cannot be used with problem " +
                                            std::string(to_string(*cfg.problem)));
  }
  if (cfg.curves.empty()) throw Error(ErrorKind::ConfigError, "components: at least one curve required");
}

namespace detail {

inline double number_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::ConfigError, where + "." + key + ": missing");
  if (!j.at(key).is_number()) throw Error(ErrorKind::ConfigError, where + "." + key + ": not a number");
  return j.at(key).get<double>();
}

inline std::vector<double> array_field(const nlohmann::json& j, const std::string& key,
                                       const std::string& where, std::size_t exact = 0) {
  if (!j.contains(key)) return {};
  const auto& a = j.at(key);
  if (!a.is_array()) throw Error(ErrorKind::ConfigError, where + "." + key + ": not an array");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw Error(ErrorKind::ConfigError, where + "." + key + ": non-numeric entry");
    out.push_back(v.get<double>());
  }
  if (exact && out.size() != exact)
    throw Error(ErrorKind::ConfigError,
                where + "." + key + ": expected " + std::to_string(exact) + " entries");
  return out;
}

inline CurveSpec curve_from_json(const nlohmann::json& c, const std::string& where) {
  if (!c.is_object()) throw Error(ErrorKind::ConfigError, where + ": not an object");
  CurveSpec s;
  const std::string kind = c.value("kind", std::string("circle"));
  if (c.contains("center")) {
    const auto ctr = array_field(c, "center", where, 2);
    s.center = Point(ctr[0], ctr[1]);
  }
  if (kind == "circle") {
    s.kind = CurveKind::circle;
    s.radius = number_field(c, "radius", where);
    if (!(s.radius > 0)) throw Error(ErrorKind::ConfigError, where + ".radius: must be positive");
  } else if (kind == "ellipse") {
    s.kind = CurveKind::ellipse;
    if (c.contains("semi_axes")) {
      const auto ab = array_field(c, "semi_axes", where, 2);
      s.semi_a = ab[0];
      s.semi_b = ab[1];
    } else {
      s.semi_a = number_field(c, "a", where);
      s.semi_b = number_field(c, "b", where);
    }
    if (!(s.semi_a > 0 && s.semi_b > 0))
      throw Error(ErrorKind::ConfigError, where + ".semi_axes: must be positive");
  } else if (kind == "fourier") {
    s.kind = CurveKind::fourier;
    s.x_cos = array_field(c, "x_cos", where);
    s.x_sin = array_field(c, "x_sin", where);
    s.y_cos = array_field(c, "y_cos", where);
    s.y_sin = array_field(c, "y_sin", where);
  } else {
    throw Error(ErrorKind::ConfigError, where + ".kind: unknown curve kind '" + kind + "'");
  }
  const std::string orient = c.value("orientation", std::string("positive"));
  if (orient == "positive") {
    s.orientation = Orientation::positive;
  } else if (orient == "negative") {
    s.orientation = Orientation::negative;
  } else {
    throw Error(ErrorKind::ConfigError,
                where + ".orientation: expected 'positive' or 'negative', got '" + orient + "'");
  }
  return s;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "top level must be an object");
  RunConfig cfg;
  Index default_n = kDefaultNodes;
  if (j.contains("nodes")) {
    if (!j["nodes"].is_number_integer()) throw Error(ErrorKind::ConfigError, "nodes: not an integer");
    default_n = j["nodes"].get<Index>();
  }
  if (!j.contains("components") || !j["components"].is_array())
    throw Error(ErrorKind::ConfigError, "components: missing or not an array");
  const auto& comps = j["components"];
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string where = "components[" + std::to_string(i) + "]";
    cfg.curves.push_back(detail::curve_from_json(comps[i], where));
    Index n = default_n;
    if (comps[i].contains("nodes")) {
      if (!comps[i]["nodes"].is_number_integer())
        throw Error(ErrorKind::ConfigError, where + ".nodes: not an integer");
      n = comps[i]["nodes"].get<Index>();
    }
    cfg.nodes.push_back(n);
  }
  if (j.contains("problem")) cfg.problem = parse_problem(j["problem"].get<std::string>());
  if (j.contains("data")) cfg.data = parse_data_spec(j["data"].get<std::string>());
  if (j.contains("tolerance")) cfg.tolerance = detail::number_field(j, "tolerance", "config");
  if (j.contains("alpha")) {
    cfg.alpha = detail::number_field(j, "alpha", "config");
    if (!(*cfg.alpha > 0 && *cfg.alpha < 1))
      throw Error(ErrorKind::ConfigError, "alpha: must lie in (0, 1)");
  }
  if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::vector<double> read_value_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find_last_of(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      out.push_back(std::stod(cell));
    } catch (const std::logic_error&) {
      if (out.empty() && lineno == 1) continue;  // header
      throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

/// g_K(theta) = sum_{k=1..K} k^-2 cos(2^k theta).
inline double hadamard_trace(int terms, double theta) {
  double s = 0.0;
  for (int k = 1; k <= terms; ++k)
    s += std::cos(std::ldexp(1.0, k) * theta) / (static_cast<double>(k) * k);
  return s;
}

inline GridFunction make_data(const BoundaryMesh& mesh, const DataSpec& d) {
  switch (d.kind) {
    case DataSpec::Kind::constant: return GridFunction::Constant(mesh.size(), d.value);
    case DataSpec::Kind::fourier:
      return sample(mesh, [&](const Point& p) { return std::cos(d.index * std::atan2(p.y(), p.x())); });
    case DataSpec::Kind::indicator:
      try {
        return curve_indicator(mesh, d.index);
      } catch (const Error&) {
        throw Error(ErrorKind::ConfigError, "data: indicator curve index out of range");
      }
    case DataSpec::Kind::hadamard:
      return sample(mesh, [&](const Point& p) { return hadamard_trace(d.index, std::atan2(p.y(), p.x())); });
    case DataSpec::Kind::csv: {
      const auto v = read_value_column(d.path);
      if (static_cast<Index>(v.size()) != mesh.size())
        throw Error(ErrorKind::ConfigError, "data: " + d.path + " has " + std::to_string(v.size()) +
                                                " values for " + std::to_string(mesh.size()) + " nodes");
      return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    }
  }
  return {};
}

inline nlohmann::json to_json_vector(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j;
  j["problem"] = r.problem;
  j["region"] = std::string(to_string(r.solution.region));
  j["equation_residual"] = r.equation_residual;
  j["boundary_residual"] = r.boundary_residual;
  j["compat_values"] = r.compat_values;
  j["constant"] = r.solution.constant;
  if (r.rank) j["rank"] = *r.rank;
  if (r.expected_rank_deficiency) j["expected_rank_deficiency"] = *r.expected_rank_deficiency;
  if (r.value_at_infinity) j["value_at_infinity"] = *r.value_at_infinity;
  if (r.infinity_probe_mean) j["infinity_probe_mean"] = *r.infinity_probe_mean;
  if (r.cross_check) j["cross_check"] = *r.cross_check;
  j["notes"] = r.notes;
  nlohmann::json dens = nlohmann::json::object();
  for (const auto& [name, d] : r.densities) dens[name] = to_json_vector(d);
  j["densities"] = dens;
  return j;
}

inline nlohmann::json to_json(const PairDistribution& t) {
  return {{"side", std::string(to_string(t.side))}, {"mu0", to_json_vector(t.mu0)},
          {"mu1", to_json_vector(t.mu1)}};
}

inline PairDistribution pair_from_json(const nlohmann::json& j) {
  PairDistribution t;
  const std::string side = j.at("side").get<std::string>();
  if (side != "plus" && side != "minus") throw Error(ErrorKind::ConfigError, "side: expected plus or minus");
  t.side = side == "plus" ? Side::plus : Side::minus;
  const auto a = j.at("mu0").get<std::vector<double>>();
  const auto b = j.at("mu1").get<std::vector<double>>();
  t.mu0 = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Index>(a.size()));
  t.mu1 = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Index>(b.size()));
  return t;
}

struct GridSpec {
  Point lo = Point(-1, -1);
  Point hi = Point(1, 1);
  int nx = 41;
  int ny = 41;
};

/// Bounding box of the boundary, padded by half its size for exterior fields.
inline GridSpec default_grid(const BoundaryMesh& mesh, Region region) {
  GridSpec g;
  g.lo = mesh.nodes.rowwise().minCoeff();
  g.hi = mesh.nodes.rowwise().maxCoeff();
  if (region == Region::exterior) {
    const Point pad = 0.5 * (g.hi - g.lo);
    g.lo -= pad;
    g.hi += pad;
  }
  return g;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV `x,y,u`; points outside the field's region or inside the
/// near-boundary band get an empty u cell.
inline void write_field_csv(const HarmonicField& field, const GridSpec& grid, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path);
  out << "x,y,u\n";
  for (int a = 0; a < grid.nx; ++a) {
    for (int b = 0; b < grid.ny; ++b) {
      const double x = grid.nx > 1 ? grid.lo.x() + (grid.hi.x() - grid.lo.x()) * a / (grid.nx - 1) : grid.lo.x();
      const double y = grid.ny > 1 ? grid.lo.y() + (grid.hi.y() - grid.lo.y()) * b / (grid.ny - 1) : grid.lo.y();
      const Point p(x, y);
      const Location loc = locate_point(*field.mesh, p);
      const bool inside = loc.kind == Location::Kind::interior;
      out << format_double(x) << ',' << format_double(y) << ',';
      if (loc.kind != Location::Kind::near_boundary && inside == (field.region == Region::interior)) {
        Points pts(2, 1);
        pts.col(0) = p;
        out << format_double(field.evaluate_unchecked(pts)[0]);
      }
      out << '\n';
    }
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed for " + path);
}

struct FieldRow {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> u;
};

inline std::vector<FieldRow> read_field_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<FieldRow> rows;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos, ErrorKind::IoError,
            "malformed field row in " + path);
    FieldRow r;
    r.x = std::stod(line.substr(0, c1));
    r.y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string u = line.substr(c2 + 1);
    if (!u.empty()) r.u = std::stod(u);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace layerpot
