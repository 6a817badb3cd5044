#pragma once

// Parametrized closed curves, periodic-trapezoid boundary meshes, domain
// topology (connected components of the domain and of its exterior) and
// point location.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "layerpot/error.hpp"

namespace layerpot {

using Point = Eigen::Vector2d;
using GridFunction = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class CurveKind { circle, ellipse, fourier };
enum class Orientation { positive, negative };

/// A 2pi-periodic parametrized closed curve.
///
/// Fourier curves are x(t) = cx + sum_k (x_cos[k] cos kt + x_sin[k] sin kt),
/// likewise for y; index 0 of the cosine arrays is the constant term.
/// `negative` orientation traverses the parametrization backwards. Normals are
/// always fixed by the domain topology, never by the traversal direction.
struct CurveSpec {
  CurveKind kind = CurveKind::circle;
  Point center = Point::Zero();
  double radius = 1.0;
  double semi_a = 1.0;
  double semi_b = 1.0;
  std::vector<double> x_cos, x_sin, y_cos, y_sin;
  Orientation orientation = Orientation::positive;

  static CurveSpec circle(Point c, double r, Orientation o = Orientation::positive) {
    CurveSpec s;
    s.kind = CurveKind::circle;
    s.center = c;
    s.radius = r;
    s.orientation = o;
    return s;
  }

  static CurveSpec ellipse(Point c, double a, double b, Orientation o = Orientation::positive) {
    CurveSpec s;
    s.kind = CurveKind::ellipse;
    s.center = c;
    s.semi_a = a;
    s.semi_b = b;
    s.orientation = o;
    return s;
  }

  static CurveSpec fourier(Point c, std::vector<double> xc, std::vector<double> xs,
                           std::vector<double> yc, std::vector<double> ys,
                           Orientation o = Orientation::positive) {
    CurveSpec s;
    s.kind = CurveKind::fourier;
    s.center = c;
    s.x_cos = std::move(xc);
    s.x_sin = std::move(xs);
    s.y_cos = std::move(yc);
    s.y_sin = std::move(ys);
    s.orientation = o;
    return s;
  }

  /// The classical kite: (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
  static CurveSpec kite(Point c = Point::Zero()) {
    return fourier(c, {-0.65, 1.0, 0.65}, {}, {}, {0.0, 1.5});
  }
};

/// Position and first two parameter derivatives of a curve.
struct CurveJet {
  Point x;
  Point dx;
  Point ddx;
};

inline CurveJet evaluate(const CurveSpec& spec, double t) {
  const double sgn = spec.orientation == Orientation::positive ? 1.0 : -1.0;
  const double s = sgn * t;
  CurveJet jet;
  switch (spec.kind) {
    case CurveKind::circle:
    case CurveKind::ellipse: {
      const double a = spec.kind == CurveKind::circle ? spec.radius : spec.semi_a;
      const double b = spec.kind == CurveKind::circle ? spec.radius : spec.semi_b;
      jet.x = spec.center + Point(a * std::cos(s), b * std::sin(s));
      jet.dx = sgn * Point(-a * std::sin(s), b * std::cos(s));
      jet.ddx = Point(-a * std::cos(s), -b * std::sin(s));
      break;
    }
    case CurveKind::fourier: {
      auto series = [s](const std::vector<double>& cc, const std::vector<double>& ss) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (std::size_t k = 0; k < cc.size(); ++k) {
          const double kk = static_cast<double>(k);
          v += cc[k] * Eigen::Vector3d(std::cos(kk * s), -kk * std::sin(kk * s),
                                       -kk * kk * std::cos(kk * s));
        }
        for (std::size_t k = 0; k < ss.size(); ++k) {
          const double kk = static_cast<double>(k);
          v += ss[k] * Eigen::Vector3d(std::sin(kk * s), kk * std::cos(kk * s),
                                       -kk * kk * std::sin(kk * s));
        }
        return v;
      };
      const Eigen::Vector3d xv = series(spec.x_cos, spec.x_sin);
      const Eigen::Vector3d yv = series(spec.y_cos, spec.y_sin);
      jet.x = spec.center + Point(xv[0], yv[0]);
      jet.dx = sgn * Point(xv[1], yv[1]);
      jet.ddx = Point(xv[2], yv[2]);
      break;
    }
  }
  return jet;
}

enum class ComponentRole { outer, hole };

/// One boundary curve inside a mesh. `omega` is the 1-based index of the
/// domain component it bounds; `omega_minus` is the index of the exterior
/// component it touches (0 = unbounded).
struct Component {
  Index offset = 0;
  Index size = 0;
  ComponentRole role = ComponentRole::outer;
  int parent = -1;
  int omega = 1;
  int omega_minus = 0;
};

/// Nystrom discretization of a multiply connected boundary. Normals point out
/// of the domain: away from the enclosed area on outer curves and into the
/// hole on hole curves. Curvature is signed against that normal (a disk of
/// radius a has curvature 1/a, a hole of radius a has -1/a).
struct BoundaryMesh {
  std::vector<CurveSpec> curves;
  std::vector<Component> components;
  Eigen::VectorXd param;
  Eigen::Matrix2Xd nodes;
  Eigen::Matrix2Xd tangents;
  Eigen::Matrix2Xd normals;
  Eigen::VectorXd speed;
  Eigen::VectorXd curvature;
  Eigen::VectorXd weights;
  std::vector<int> component_of;

  Index size() const { return nodes.cols(); }
  Index component_count() const { return static_cast<Index>(components.size()); }
  Point node(Index i) const { return nodes.col(i); }
  Point normal(Index i) const { return normals.col(i); }
  double max_spacing() const { return weights.maxCoeff(); }

  std::vector<Index> nodes_per_component() const {
    std::vector<Index> n;
    for (const auto& c : components) n.push_back(c.size);
    return n;
  }
};

namespace detail {

inline int winding_number(const Point& p, const Eigen::Matrix2Xd& poly) {
  auto is_left = [](const Point& a, const Point& b, const Point& q) {
    return (b.x() - a.x()) * (q.y() - a.y()) - (q.x() - a.x()) * (b.y() - a.y());
  };
  int wn = 0;
  const Index n = poly.cols();
  for (Index i = 0; i < n; ++i) {
    const Point a = poly.col(i);
    const Point b = poly.col((i + 1) % n);
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && is_left(a, b, p) > 0) ++wn;
    } else if (b.y() <= p.y() && is_left(a, b, p) < 0) {
      --wn;
    }
  }
  return wn;
}

inline double signed_area(const Eigen::Matrix2Xd& poly) {
  double area = 0.0;
  const Index n = poly.cols();
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    area += poly(0, i) * poly(1, j) - poly(0, j) * poly(1, i);
  }
  return 0.5 * area;
}

inline bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

// Rejects polygon edges that cross, within one curve (non-adjacent edges) or
// across curves.
inline void check_no_crossings(const std::vector<Eigen::Matrix2Xd>& polys) {
  struct Edge {
    Point a, b;
    int curve;
    Index idx, n;
  };
  std::vector<Edge> edges;
  for (int c = 0; c < static_cast<int>(polys.size()); ++c) {
    const Index n = polys[c].cols();
    for (Index i = 0; i < n; ++i)
      edges.push_back({polys[c].col(i), polys[c].col((i + 1) % n), c, i, n});
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& E = edges[e];
    const Eigen::AlignedBox2d box_e(E.a.cwiseMin(E.b), E.a.cwiseMax(E.b));
    for (std::size_t f = e + 1; f < edges.size(); ++f) {
      const Edge& F = edges[f];
      if (E.curve == F.curve) {
        const Index d = std::abs(E.idx - F.idx);
        if (d <= 1 || d == E.n - 1) continue;
      }
      const Eigen::AlignedBox2d box_f(F.a.cwiseMin(F.b), F.a.cwiseMax(F.b));
      if (!box_e.intersects(box_f)) continue;
      if (segments_cross(E.a, E.b, F.a, F.b)) {
        throw Error(ErrorKind::InvalidGeometry,
                    E.curve == F.curve
                        ? "curve " + std::to_string(E.curve) + " intersects itself"
                        : "curves " + std::to_string(E.curve) + " and " +
                              std::to_string(F.curve) + " intersect");
      }
    }
  }
}

// Outer/hole classification by containment of each curve's first node in the
// other curves' node polygons. More than one level of nesting is rejected.
inline std::vector<Component> classify_nesting(const std::vector<Eigen::Matrix2Xd>& polys) {
  const int m = static_cast<int>(polys.size());
  std::vector<std::vector<int>> containers(m);
  for (int c = 0; c < m; ++c)
    for (int d = 0; d < m; ++d)
      if (c != d && winding_number(polys[c].col(0), polys[d]) != 0) containers[c].push_back(d);

  std::vector<Component> comps(m);
  int omega = 0;
  int omega_minus = 0;
  for (int c = 0; c < m; ++c) {
    if (containers[c].empty()) {
      comps[c].role = ComponentRole::outer;
      comps[c].omega = ++omega;
      comps[c].omega_minus = 0;
    }
  }
  for (int c = 0; c < m; ++c) {
    if (containers[c].empty()) continue;
    const int parent = containers[c].front();
    if (containers[c].size() > 1 || !containers[parent].empty()) {
      throw Error(ErrorKind::InvalidGeometry,
                  "curve " + std::to_string(c) + " is nested more than one level deep");
    }
    comps[c].role = ComponentRole::hole;
    comps[c].parent = parent;
    comps[c].omega = comps[parent].omega;
    comps[c].omega_minus = ++omega_minus;
  }
  return comps;
}

}  // namespace detail

/// Assembles the trapezoid-rule mesh. Every curve gets an even node count of
/// at least 16; node i of a curve sits at t_i = 2 pi i / N.
inline BoundaryMesh build_mesh(const std::vector<CurveSpec>& specs,
                               const std::vector<Index>& nodes_per_component) {
  require(!specs.empty(), ErrorKind::InvalidGeometry, "no boundary curves given");
  require(specs.size() == nodes_per_component.size(), ErrorKind::InvalidGeometry,
          "one node count per curve is required");
  for (Index n : nodes_per_component) {
    require(n >= 16 && n % 2 == 0, ErrorKind::InvalidGeometry,
            "node counts must be even and at least 16 (got " + std::to_string(n) + ")");
  }

  BoundaryMesh mesh;
  mesh.curves = specs;
  Index total = 0;
  for (Index n : nodes_per_component) total += n;
  mesh.param.resize(total);
  mesh.nodes.resize(2, total);
  mesh.tangents.resize(2, total);
  mesh.normals.resize(2, total);
  mesh.speed.resize(total);
  mesh.curvature.resize(total);
  mesh.weights.resize(total);
  mesh.component_of.resize(total);

  Eigen::Matrix2Xd second(2, total);
  std::vector<Eigen::Matrix2Xd> polys;
  Index offset = 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const Index n = nodes_per_component[c];
    double max_speed = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
      const CurveJet jet = evaluate(specs[c], t);
      const Index g = offset + i;
      mesh.param[g] = t;
      mesh.nodes.col(g) = jet.x;
      mesh.speed[g] = jet.dx.norm();
      mesh.tangents.col(g) = jet.dx / std::max(mesh.speed[g], 1e-300);
      second.col(g) = jet.ddx;
      mesh.weights[g] = mesh.speed[g] * kTwoPi / static_cast<double>(n);
      mesh.component_of[g] = static_cast<int>(c);
      max_speed = std::max(max_speed, mesh.speed[g]);
      require(std::isfinite(mesh.speed[g]), ErrorKind::InvalidGeometry, "non-finite curve data");
    }
    for (Index i = 0; i < n; ++i) {
      require(mesh.speed[offset + i] > 1e-12 * std::max(1.0, max_speed),
              ErrorKind::InvalidGeometry,
              "curve " + std::to_string(c) + " has a vanishing tangent |x'(t)| = 0");
    }
    polys.push_back(mesh.nodes.middleCols(offset, n));
    offset += n;
  }

  detail::check_no_crossings(polys);
  std::vector<Component> comps = detail::classify_nesting(polys);

  offset = 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const Index n = nodes_per_component[c];
    comps[c].offset = offset;
    comps[c].size = n;
    const double traversal = detail::signed_area(polys[c]) > 0 ? 1.0 : -1.0;
    const double side = comps[c].role == ComponentRole::outer ? 1.0 : -1.0;
    for (Index i = offset; i < offset + n; ++i) {
      const Point tan = mesh.tangents.col(i);
      mesh.normals.col(i) = traversal * side * Point(tan.y(), -tan.x());
      mesh.curvature[i] =
          -mesh.normals.col(i).dot(second.col(i)) / (mesh.speed[i] * mesh.speed[i]);
    }
    offset += n;
  }
  mesh.components = std::move(comps);
  return mesh;
}

/// Same node count on every curve.
inline BoundaryMesh build_mesh(const std::vector<CurveSpec>& specs, Index nodes_each) {
  return build_mesh(specs, std::vector<Index>(specs.size(), nodes_each));
}

/// Copy of `mesh` with the node count of every curve multiplied by `factor`.
inline BoundaryMesh refine(const BoundaryMesh& mesh, Index factor) {
  std::vector<Index> n = mesh.nodes_per_component();
  for (auto& k : n) k *= factor;
  return build_mesh(mesh.curves, n);
}

/// kappa_plus components of the domain, kappa_minus bounded components of the
/// exterior, and the node masks of their boundaries.
struct DomainTopology {
  int kappa_plus = 0;
  int kappa_minus = 0;
  std::vector<int> omega_of_curve;
  std::vector<int> omega_minus_of_curve;
  std::vector<GridFunction> omega_masks;        // index j-1 for Omega_j
  std::vector<GridFunction> omega_minus_masks;  // index k for (Omega^-)_k, k = 0 unbounded
};

inline DomainTopology topology_of(const BoundaryMesh& mesh) {
  std::vector<Eigen::Matrix2Xd> polys;
  for (const auto& c : mesh.components) polys.push_back(mesh.nodes.middleCols(c.offset, c.size));
  const std::vector<Component> comps = detail::classify_nesting(polys);

  DomainTopology topo;
  for (const auto& c : comps) {
    topo.kappa_plus = std::max(topo.kappa_plus, c.omega);
    topo.kappa_minus = std::max(topo.kappa_minus, c.omega_minus);
    topo.omega_of_curve.push_back(c.omega);
    topo.omega_minus_of_curve.push_back(c.omega_minus);
  }
  topo.omega_masks.assign(topo.kappa_plus, GridFunction::Zero(mesh.size()));
  topo.omega_minus_masks.assign(topo.kappa_minus + 1, GridFunction::Zero(mesh.size()));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& mc = mesh.components[c];
    topo.omega_masks[comps[c].omega - 1].segment(mc.offset, mc.size).setOnes();
    topo.omega_minus_masks[comps[c].omega_minus].segment(mc.offset, mc.size).setOnes();
  }
  return topo;
}

enum class RegionGroup { omega, omega_minus };

/// chi of the boundary of Omega_j (j = 1..kappa_plus) or of (Omega^-)_k
/// (k = 0..kappa_minus).
inline GridFunction indicator(const DomainTopology& topo, RegionGroup region, int index) {
  if (region == RegionGroup::omega) {
    require(index >= 1 && index <= topo.kappa_plus, ErrorKind::OutOfRange,
            "Omega_j index " + std::to_string(index) + " outside 1.." +
                std::to_string(topo.kappa_plus));
    return topo.omega_masks[index - 1];
  }
  require(index >= 0 && index <= topo.kappa_minus, ErrorKind::OutOfRange,
          "(Omega^-)_k index " + std::to_string(index) + " outside 0.." +
              std::to_string(topo.kappa_minus));
  return topo.omega_minus_masks[index];
}

/// Indicator of a single boundary curve.
inline GridFunction curve_indicator(const BoundaryMesh& mesh, int curve) {
  require(curve >= 0 && curve < static_cast<int>(mesh.components.size()), ErrorKind::OutOfRange,
          "curve index " + std::to_string(curve) + " out of range");
  GridFunction f = GridFunction::Zero(mesh.size());
  f.segment(mesh.components[curve].offset, mesh.components[curve].size).setOnes();
  return f;
}

inline double integrate(const BoundaryMesh& mesh, const GridFunction& f) {
  require_length(f.size(), mesh.size(), "integrate");
  return mesh.weights.dot(f);
}

/// Weighted duality pairing sum_i w_i f_i g_i.
inline double pairing(const BoundaryMesh& mesh, const GridFunction& f, const GridFunction& g) {
  require_length(f.size(), mesh.size(), "pairing");
  require_length(g.size(), mesh.size(), "pairing");
  return (mesh.weights.array() * f.array() * g.array()).sum();
}

inline double boundary_length(const BoundaryMesh& mesh) { return mesh.weights.sum(); }

struct Location {
  enum class Kind { interior, exterior, near_boundary };
  Kind kind = Kind::near_boundary;
  /// interior: 1-based domain component; exterior: exterior component (0 = unbounded).
  int index = 0;

  bool operator==(const Location&) const = default;
  static Location interior(int j) { return {Kind::interior, j}; }
  static Location exterior(int k) { return {Kind::exterior, k}; }
  static Location near_boundary() { return {Kind::near_boundary, -1}; }
};

inline Location locate_point(const BoundaryMesh& mesh, const Point& p) {
  const double band = 2.0 * mesh.max_spacing();
  const double dist = (mesh.nodes.colwise() - p).colwise().norm().minCoeff();
  if (dist < band) return Location::near_boundary();

  for (const auto& c : mesh.components) {
    if (c.role != ComponentRole::hole) continue;
    if (detail::winding_number(p, mesh.nodes.middleCols(c.offset, c.size)) != 0)
      return Location::exterior(c.omega_minus);
  }
  for (const auto& c : mesh.components) {
    if (c.role != ComponentRole::outer) continue;
    if (detail::winding_number(p, mesh.nodes.middleCols(c.offset, c.size)) != 0)
      return Location::interior(c.omega);
  }
  return Location::exterior(0);
}

/// Overload kept for call sites that already hold a topology; location only
/// depends on the mesh.
inline Location locate_point(const BoundaryMesh& mesh, const DomainTopology&, const Point& p) {
  return locate_point(mesh, p);
}

/// Trigonometric interpolation of nodal values from `from` onto `to`; both
/// meshes must discretize the same curves.
inline GridFunction resample(const BoundaryMesh& from, const GridFunction& f,
                             const BoundaryMesh& to) {
  require_length(f.size(), from.size(), "resample");
  require(from.components.size() == to.components.size(), ErrorKind::InvalidGeometry,
          "resample: meshes have different curve counts");
  GridFunction out(to.size());
  for (std::size_t c = 0; c < from.components.size(); ++c) {
    const Index n = from.components[c].size;
    const Index half = n / 2;
    const auto src = f.segment(from.components[c].offset, n);
    Eigen::VectorXd a(half + 1), b(half + 1);
    for (Index k = 0; k <= half; ++k) {
      double sa = 0.0, sb = 0.0;
      for (Index j = 0; j < n; ++j) {
        const double arg = kTwoPi * static_cast<double>(k * j % n) / static_cast<double>(n);
        sa += src[j] * std::cos(arg);
        sb += src[j] * std::sin(arg);
      }
      a[k] = 2.0 * sa / static_cast<double>(n);
      b[k] = 2.0 * sb / static_cast<double>(n);
    }
    const auto& tc = to.components[c];
    for (Index i = 0; i < tc.size; ++i) {
      const double t = to.param[tc.offset + i];
      double v = 0.5 * a[0] + 0.5 * a[half] * std::cos(static_cast<double>(half) * t);
      for (Index k = 1; k < half; ++k) {
        const double kt = static_cast<double>(k) * t;
        v += a[k] * std::cos(kt) + b[k] * std::sin(kt);
      }
      out[tc.offset + i] = v;
    }
  }
  return out;
}

/// Samples a function of position at every node.
template <class F>
GridFunction sample(const BoundaryMesh& mesh, F&& fn) {
  GridFunction g(mesh.size());
  for (Index i = 0; i < mesh.size(); ++i) g[i] = fn(Point(mesh.nodes.col(i)));
  return g;
}

}  // namespace layerpot
