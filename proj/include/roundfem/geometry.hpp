#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "roundfem/core.hpp"

namespace roundfem {

/// A simple straight polygon, counterclockwise, with derived corner data.
struct Polygon {
  std::vector<Vec2> vertices;  // counterclockwise
  std::vector<double> angles;  // interior angle at each vertex, in (0, 2*pi)
  double alpha_max = 0.0;
  double alpha_min = 0.0;
  double R0 = 0.0;  // min distance between non-intersecting closed edges
  double R = 0.0;   // separation radius, R0/2

  int size() const { return static_cast<int>(vertices.size()); }
  Vec2 vertex(int j) const {  // circular indexing
    int n = size();
    return vertices[((j % n) + n) % n];
  }
  /// Distance from x to the closed polygon (0 inside).
  double distance(Vec2 x) const;
  /// Strict interior test (points on the boundary are unreliable).
  bool contains(Vec2 x) const;
  double area() const;
  /// Index of the closest edge [v_e, v_{e+1}] and the foot parameter in [0,1].
  void closest_edge(Vec2 x, int& edge, double& t) const;
};

Polygon polygon_validate(const std::vector<Vec2>& vertices);

/// Built-in polygons: "square", "lshape", "star5".
Polygon polygon_preset(const std::string& name);

struct RoundingParams {
  double rho = 0.0;        // base rounding radius
  double rho_prime = 0.0;  // offset distance
  int n = 1;               // family index >= 1
};

/// Unit direction of the exterior bisectrix at vertex j.
Vec2 exterior_bisectrix(const Polygon& poly, int j);

/// Homothety of center p and ratio c.
inline Vec2 homothety(Vec2 center, double ratio, Vec2 x) {
  return center + ratio * (x - center);
}

/// Rounding centers p_{jn} = p_j + (rho/(2n)) * bisectrix_j.
std::vector<Vec2> rounding_centers(const Polygon& poly, const RoundingParams& params);

/// The two points of the circle dB(p_{jn}, rho/(2n)) at distance rho'/n from
/// the polygon. first = same side of the bisectrix as p_{j-1}.
std::pair<Vec2, Vec2> junction_points(const Polygon& poly, const RoundingParams& params, int j);

/// C^inf corner arc. The tangent angle ramps monotonically from theta0 to
/// theta0 + dtheta through a warped exp-bump smoothstep:
///   theta(s) = theta0 + dtheta * S(warp_c(s/len)),  warp_c(t) = c t / (1 + (c-1) t).
class SmoothArc {
 public:
  SmoothArc() = default;
  SmoothArc(Vec2 start, double len, double theta0, double dtheta, double warp_c);

  Vec2 start() const { return start_; }
  Vec2 end() const { return point(len_); }
  double length() const { return len_; }
  double theta0() const { return th0_; }
  double dtheta() const { return dth_; }
  double warp() const { return c_; }

  Vec2 point(double s) const;
  Vec2 tangent(double s) const;  // unit
  double theta(double s) const;
  /// d^k theta / ds^k for k >= 1.
  double theta_deriv(double s, int k) const;
  /// Euclidean curvature with respect to the outward normal of a
  /// counterclockwise boundary (= -theta').
  double curvature(double s) const { return -theta_deriv(s, 1); }

  /// Image under the homothety h_{center,ratio}; the tangent profile is
  /// preserved, lengths scale by ratio.
  SmoothArc mapped(Vec2 center, double ratio) const;

 private:
  void build_prefix();
  Vec2 start_{};
  double len_ = 0.0, th0_ = 0.0, dth_ = 0.0, c_ = 1.0;
  std::vector<Vec2> prefix_;  // displacement integral at panel boundaries
  int panels_ = 0;
};

SmoothArc junction_curve(const Polygon& poly, const RoundingParams& params, int j);

struct Segment {
  Vec2 a, b;
  double length() const { return dist(a, b); }
  Vec2 point(double s) const { return a + (s / length()) * (b - a); }
  Vec2 tangent() const { return normalized(b - a); }
};

/// One boundary piece of a rounded domain; arcs and segments alternate.
struct BoundaryPiece {
  std::variant<SmoothArc, Segment> geom;
  int id = 0;
  double length = 0.0;
  bool is_arc() const { return std::holds_alternative<SmoothArc>(geom); }
  Vec2 point(double s) const;
  Vec2 tangent(double s) const;
  /// Euclidean curvature w.r.t. the outward normal (0 on segments).
  double curvature(double s) const;
};

/// One family member Omega_n: closed smooth boundary
/// c_1, l_1, c_2, l_2, ..., c_N, l_N plus its puncture set V_n.
struct RoundedDomain {
  int n = 1;
  RoundingParams params;
  Polygon parent;
  std::vector<BoundaryPiece> pieces;
  std::vector<Vec2> punctures;

  double boundary_length() const;
  /// Point at global arc-length parameter t (wrapped).
  Vec2 boundary_point(double t) const;
  Vec2 boundary_tangent(double t) const;
  Vec2 outward_normal(double t) const;
  double boundary_curvature(double t) const;
  void locate(double t, int& piece, double& s) const;

  bool contains(Vec2 x) const;
  double area() const;
  /// Closed polyline sample of the whole boundary (chord tolerance tol).
  std::vector<Vec2> sample_boundary(double tol) const;

 private:
  mutable std::vector<double> prefix_;  // piece length prefix sums
  mutable std::vector<Vec2> hull_cache_;
  void ensure_prefix() const;
};

RoundedDomain construct_rounded_domain(const Polygon& poly, const RoundingParams& params);

/// rho = R0/4 and the first rho' (halving from rho/4) feasible at every
/// vertex with all straight parts of positive length. n is set to 1.
RoundingParams select_default_params(const Polygon& poly);

/// Writes the boundary as an SVG path (arcs sampled with 64 cubic spline
/// segments each).
std::string boundary_svg_path(const RoundedDomain& dom);

/// "x y piece_id" per sampled boundary point.
std::string boundary_polyline_text(const RoundedDomain& dom);

}  // namespace roundfem
