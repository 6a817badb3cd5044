#pragma once

// Off-boundary evaluation of single and double layer potentials, their
// boundary traces through the jump relations, and limits at infinity.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "layerpot/error.hpp"
#include "layerpot/geometry.hpp"
#include "layerpot/kernels.hpp"
#include "layerpot/operators.hpp"

namespace layerpot {

using Points = Eigen::Matrix2Xd;

namespace detail {

inline void require_off_boundary(const BoundaryMesh& mesh, const Points& points) {
  const double band = 2.0 * mesh.max_spacing();
  for (Index p = 0; p < points.cols(); ++p) {
    const double dist = (mesh.nodes.colwise() - points.col(p)).colwise().norm().minCoeff();
    if (dist < band) {
      throw Error(ErrorKind::NearBoundary,
                  "point (" + std::to_string(points(0, p)) + ", " + std::to_string(points(1, p)) +
                      ") lies within the near-boundary band");
    }
  }
}

}  // namespace detail

/// v[mu](p) = int S_2(p - y) mu(y) dsigma_y by the trapezoid rule.
inline Eigen::VectorXd eval_single_layer(const BoundaryMesh& mesh, const GridFunction& mu,
                                         const Points& points) {
  require_length(mu.size(), mesh.size(), "eval_single_layer");
  detail::require_off_boundary(mesh, points);
  const Eigen::VectorXd wm = mesh.weights.cwiseProduct(mu);
  Eigen::VectorXd out(points.cols());
  for (Index p = 0; p < points.cols(); ++p) {
    double s = 0.0;
    for (Index j = 0; j < mesh.size(); ++j)
      s += kernel2d::log_kernel(points.col(p) - mesh.nodes.col(j)) * wm[j];
    out[p] = s;
  }
  return out;
}

/// w[psi](p) = int psi(y) d/dnu_y S_2(p - y) dsigma_y by the trapezoid rule.
inline Eigen::VectorXd eval_double_layer(const BoundaryMesh& mesh, const GridFunction& psi,
                                         const Points& points) {
  require_length(psi.size(), mesh.size(), "eval_double_layer");
  detail::require_off_boundary(mesh, points);
  const Eigen::VectorXd wp = mesh.weights.cwiseProduct(psi);
  Eigen::VectorXd out(points.cols());
  for (Index p = 0; p < points.cols(); ++p) {
    double s = 0.0;
    for (Index j = 0; j < mesh.size(); ++j)
      s += kernel2d::double_layer(points.col(p), mesh.nodes.col(j), mesh.normals.col(j)) * wp[j];
    out[p] = s;
  }
  return out;
}

inline GridFunction trace_single(const BoundaryOperators& ops, const GridFunction& mu) {
  return apply(ops.V(), mu);
}

/// w^{+/-}[psi] on the boundary: +/- psi/2 + W psi.
inline GridFunction trace_double(const BoundaryOperators& ops, const GridFunction& psi, Side side) {
  require_length(psi.size(), ops.size(), "trace_double");
  const double s = side == Side::plus ? 0.5 : -0.5;
  return s * psi + ops.W().matrix * psi;
}

/// Normal derivative (along the outward normal of the domain) of v^{+/-}[mu]:
/// -/+ mu/2 + Wt mu.
inline GridFunction normal_derivative_single(const BoundaryOperators& ops, const GridFunction& mu,
                                             Side side) {
  require_length(mu.size(), ops.size(), "normal_derivative_single");
  const double s = side == Side::plus ? -0.5 : 0.5;
  return s * mu + ops.Wt().matrix * mu;
}

enum class LayerKind { single, double_layer };
enum class Region { interior, exterior };

constexpr std::string_view to_string(Region r) {
  return r == Region::interior ? "interior" : "exterior";
}

struct LayerTerm {
  LayerKind kind = LayerKind::single;
  GridFunction density;
};

/// A harmonic function given by layer potentials plus a constant, valid in
/// one region (the domain, or its exterior).
struct HarmonicField {
  MeshPtr mesh;
  std::vector<LayerTerm> terms;
  double constant = 0.0;
  Region region = Region::interior;
  std::optional<double> value_at_infinity;

  HarmonicField& add_single(GridFunction mu) {
    terms.push_back({LayerKind::single, std::move(mu)});
    return *this;
  }
  HarmonicField& add_double(GridFunction psi) {
    terms.push_back({LayerKind::double_layer, std::move(psi)});
    return *this;
  }

  /// Evaluation without the region check (near-boundary is still refused).
  Eigen::VectorXd evaluate_unchecked(const Points& points) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(points.cols(), constant);
    for (const auto& t : terms) {
      out += t.kind == LayerKind::single ? eval_single_layer(*mesh, t.density, points)
                                         : eval_double_layer(*mesh, t.density, points);
    }
    return out;
  }

  Eigen::VectorXd evaluate(const Points& points) const {
    for (Index p = 0; p < points.cols(); ++p) {
      const Location loc = locate_point(*mesh, points.col(p));
      if (loc.kind == Location::Kind::near_boundary) {
        throw Error(ErrorKind::NearBoundary, "field evaluated inside the near-boundary band");
      }
      const bool inside = loc.kind == Location::Kind::interior;
      if (inside != (region == Region::interior)) {
        throw Error(ErrorKind::WrongRegion, "field of the " + std::string(to_string(region)) +
                                                " region evaluated on the other side");
      }
    }
    return evaluate_unchecked(points);
  }

  double operator()(const Point& p) const {
    Points pts(2, 1);
    pts.col(0) = p;
    return evaluate(pts)[0];
  }

  /// Sum of the single-layer densities' integrals (the logarithmic growth
  /// coefficient at infinity, up to 1/2pi).
  double single_layer_mass() const {
    double m = 0.0;
    for (const auto& t : terms)
      if (t.kind == LayerKind::single) m += integrate(*mesh, t.density);
    return m;
  }

  /// Same field with every density trigonometrically resampled onto `fine`.
  HarmonicField resampled(const MeshPtr& fine) const {
    HarmonicField f = *this;
    f.mesh = fine;
    for (auto& t : f.terms) t.density = resample(*mesh, t.density, *fine);
    return f;
  }

  HarmonicField& operator+=(const HarmonicField& other) {
    for (const auto& t : other.terms) terms.push_back(t);
    constant += other.constant;
    return *this;
  }
};

inline HarmonicField operator-(HarmonicField f) {
  for (auto& t : f.terms) t.density = -t.density;
  f.constant = -f.constant;
  return f;
}

inline Points probe_circle(double radius, Index count, Point center = Point::Zero()) {
  Points p(2, count);
  for (Index i = 0; i < count; ++i) {
    const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(count);
    p.col(i) = center + radius * Point(std::cos(t), std::sin(t));
  }
  return p;
}

struct InfinityValue {
  double quadrature_mean = 0.0;
  double representation = 0.0;
};

inline constexpr Index kInfinityProbeCount = 256;

/// Limit at infinity of an exterior field: the mean over a 256-point circle
/// of radius r about the origin, checked against the value the representation
/// forces (constant term; single layers must carry zero total mass).
inline InfinityValue value_at_infinity(const HarmonicField& field, double r) {
  require(field.region == Region::exterior, ErrorKind::InvalidProbe,
          "value at infinity requires an exterior field");
  const BoundaryMesh& mesh = *field.mesh;
  const double reach = mesh.nodes.colwise().norm().maxCoeff();
  require(r > reach + 2.0 * mesh.max_spacing(), ErrorKind::InvalidProbe,
          "probe circle of radius " + std::to_string(r) + " does not enclose the boundary");

  const double scale = std::max(1.0, boundary_length(mesh));
  double density_scale = 0.0;
  for (const auto& t : field.terms)
    if (t.kind == LayerKind::single) density_scale += t.density.lpNorm<Eigen::Infinity>();
  if (std::abs(field.single_layer_mass()) > 1e-8 * scale * std::max(1.0, density_scale)) {
    throw Error(ErrorKind::NoLimit,
                "single layer with nonzero total density grows logarithmically at infinity",
                {field.single_layer_mass()});
  }

  InfinityValue v;
  v.quadrature_mean = field.evaluate(probe_circle(r, kInfinityProbeCount)).mean();
  v.representation = field.value_at_infinity.value_or(field.constant);
  if (!(std::abs(v.quadrature_mean - v.representation) <= 1e-6)) {
    throw Error(ErrorKind::NumericalFailure,
                "probe-circle mean disagrees with the represented limit at infinity",
                {v.quadrature_mean, v.representation});
  }
  return v;
}

/// Polynomial (Richardson/Neville) extrapolation of samples f(h_k) to h = 0.
inline double extrapolate_to_zero(const std::vector<double>& hs, const std::vector<double>& fs) {
  std::vector<double> p = fs;
  const std::size_t n = hs.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      p[i] = (hs[i + m] * p[i] - hs[i] * p[i + 1]) / (hs[i + m] - hs[i]);
  return p[0];
}

/// Limit of a potential at boundary node i approached along the normal from
/// the interior (plus) or exterior (minus) side, from samples at distances hs.
/// The evaluation mesh must resolve the smallest distance (spacing well below
/// hs.back()).
inline const std::vector<double> kLimitDistances = {0.1, 0.05, 0.025, 0.0125, 0.00625};

inline double boundary_limit(const std::function<double(const Point&)>& fn,
                             const BoundaryMesh& mesh, Index i, Side side,
                             const std::vector<double>& hs = kLimitDistances) {
  const double dir = side == Side::plus ? -1.0 : 1.0;
  std::vector<double> fs;
  for (double h : hs) fs.push_back(fn(mesh.node(i) + dir * h * mesh.normal(i)));
  return extrapolate_to_zero(hs, fs);
}

}  // namespace layerpot

namespace layerpot {

/// Deterministic probe points in a region, at least `min_dist` away from
/// every boundary node: a regular scan of the (padded) bounding box, thinned
/// evenly to `count` points.
inline Points probe_points(const BoundaryMesh& mesh, Region region, Index count,
                           double min_dist = 0.2) {
  const Eigen::Vector2d lo = mesh.nodes.rowwise().minCoeff();
  const Eigen::Vector2d hi = mesh.nodes.rowwise().maxCoeff();
  const double pad = region == Region::exterior ? 1.0 + min_dist : 0.0;
  constexpr int kScan = 61;
  std::vector<Point> keep;
  for (int a = 0; a < kScan; ++a) {
    for (int b = 0; b < kScan; ++b) {
      const Point p(lo.x() - pad + (hi.x() - lo.x() + 2 * pad) * (a + 0.5) / kScan,
                    lo.y() - pad + (hi.y() - lo.y() + 2 * pad) * (b + 0.5) / kScan);
      const double dist = (mesh.nodes.colwise() - p).colwise().norm().minCoeff();
      if (dist < min_dist) continue;
      const Location loc = locate_point(mesh, p);
      if (loc.kind == Location::Kind::near_boundary) continue;
      if ((loc.kind == Location::Kind::interior) == (region == Region::interior)) keep.push_back(p);
    }
  }
  require(static_cast<Index>(keep.size()) >= count, ErrorKind::InvalidProbe,
          "region too thin for the requested probe count");
  Points out(2, count);
  for (Index i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>((static_cast<double>(i) + 0.5) *
                                            static_cast<double>(keep.size()) /
                                            static_cast<double>(count));
    out.col(i) = keep[k];
  }
  return out;
}

}  // namespace layerpot
