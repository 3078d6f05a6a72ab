#include "roundfem/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "roundfem/taylor.hpp"

namespace roundfem {

namespace {

double point_segment_dist(Vec2 x, Vec2 a, Vec2 b, double* t_out = nullptr) {
  Vec2 ab = b - a;
  double denom = dot(ab, ab);
  double t = denom > 0.0 ? dot(x - a, ab) / denom : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  if (t_out) *t_out = t;
  return dist(x, a + t * ab);
}

double segment_segment_dist(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double r = point_segment_dist(a, c, d);
  r = std::min(r, point_segment_dist(b, c, d));
  r = std::min(r, point_segment_dist(c, a, b));
  r = std::min(r, point_segment_dist(d, a, b));
  return r;
}

int orient_sign(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  int o1 = orient_sign(a, b, c), o2 = orient_sign(a, b, d);
  int o3 = orient_sign(c, d, a), o4 = orient_sign(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  auto on = [](Vec2 p, Vec2 q, Vec2 r) {  // r collinear with pq and inside box
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && on(a, b, c)) return true;
  if (o2 == 0 && on(a, b, d)) return true;
  if (o3 == 0 && on(c, d, a)) return true;
  if (o4 == 0 && on(c, d, b)) return true;
  return false;
}

// Counts transversal crossings of the open segment (a,b) with a polyline,
// by sign transitions of the side function (samples exactly on the line
// carry the previous sign).
bool polyline_crossings_odd(Vec2 a, Vec2 b, const std::vector<Vec2>& poly) {
  int count = 0;
  int last_sign = 0;
  size_t last_idx = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    int s = orient_sign(a, b, poly[i]);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) {
      // chord from poly[last_idx] to poly[i] crosses the line; restrict to
      // the segment by the crossing parameter along (a,b)
      Vec2 p = poly[last_idx], q = poly[i];
      double denom = cross(b - a, q - p);
      if (denom != 0.0) {
        double t = cross(p - a, q - p) / denom;  // parameter on (a,b)
        if (t > 1e-12 && t < 1.0 - 1e-12) ++count;
      }
    }
    last_sign = s;
    last_idx = i;
  }
  return (count % 2) == 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Polygon

double Polygon::distance(Vec2 x) const {
  if (contains(x)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  int n = size();
  for (int i = 0; i < n; ++i)
    d = std::min(d, point_segment_dist(x, vertices[i], vertex(i + 1)));
  return d;
}

void Polygon::closest_edge(Vec2 x, int& edge, double& t) const {
  double best = std::numeric_limits<double>::infinity();
  int n = size();
  for (int i = 0; i < n; ++i) {
    double ti;
    double d = point_segment_dist(x, vertices[i], vertex(i + 1), &ti);
    if (d < best) {
      best = d;
      edge = i;
      t = ti;
    }
  }
}

bool Polygon::contains(Vec2 x) const {
  // crossing-number with a horizontal ray
  bool inside = false;
  int n = size();
  for (int i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = vertices[i], b = vertices[j];
    if ((a.y > x.y) != (b.y > x.y)) {
      double xi = a.x + (x.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (x.x < xi) inside = !inside;
    }
  }
  return inside;
}

double Polygon::area() const {
  double s = 0.0;
  int n = size();
  for (int i = 0; i < n; ++i) s += cross(vertices[i], vertex(i + 1));
  return 0.5 * s;
}

Polygon polygon_validate(const std::vector<Vec2>& input) {
  if (input.size() < 3) fail("NonSimple", "need at least 3 vertices");
  for (const Vec2& v : input)
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      fail("NonSimple", "non-finite vertex coordinate");

  Polygon poly;
  poly.vertices = input;
  int n = poly.size();

  double diam = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) diam = std::max(diam, dist(input[i], input[j]));
  double tol = 1e-12 * std::max(diam, 1.0);

  for (int i = 0; i < n; ++i)
    if (dist(poly.vertices[i], poly.vertex(i + 1)) < tol)
      fail("DuplicateVertex", "vertices " + std::to_string(i) + " and next coincide");

  // counterclockwise orientation
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += cross(poly.vertices[i], poly.vertex(i + 1));
  if (s < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  if (std::abs(s) < tol * tol) fail("NonSimple", "degenerate (zero area) polygon");

  // simplicity: non-adjacent edges must not intersect
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_properly_intersect(poly.vertices[i], poly.vertex(i + 1), poly.vertices[j],
                                      poly.vertex(j + 1)))
        fail("NonSimple", "edges " + std::to_string(i) + " and " + std::to_string(j) + " cross");
    }
  }

  // interior angles: alpha = pi - turn
  poly.angles.resize(n);
  for (int j = 0; j < n; ++j) {
    Vec2 e_in = poly.vertex(j) - poly.vertex(j - 1);
    Vec2 e_out = poly.vertex(j + 1) - poly.vertex(j);
    double turn = std::atan2(cross(e_in, e_out), dot(e_in, e_out));
    double alpha = kPi - turn;
    if (alpha < 1e-9 || alpha > 2.0 * kPi - 1e-9)
      fail("DegenerateAngle", "vertex " + std::to_string(j));
    poly.angles[j] = alpha;
  }
  poly.alpha_max = *std::max_element(poly.angles.begin(), poly.angles.end());
  poly.alpha_min = *std::min_element(poly.angles.begin(), poly.angles.end());

  // R0: min distance between non-intersecting closed edges
  double r0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      r0 = std::min(r0, segment_segment_dist(poly.vertices[i], poly.vertex(i + 1),
                                             poly.vertices[j], poly.vertex(j + 1)));
    }
  }
  if (!std::isfinite(r0)) {
    // triangle: every edge pair is adjacent; use the min vertex-to-opposite-edge gap
    r0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      r0 = std::min(r0, point_segment_dist(poly.vertices[i], poly.vertex(i + 1), poly.vertex(i + 2)));
  }
  poly.R0 = r0;
  poly.R = r0 / 2.0;
  return poly;
}

Polygon polygon_preset(const std::string& name) {
  if (name == "square")
    return polygon_validate({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  if (name == "lshape")
    return polygon_validate({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  if (name == "star5") {
    std::vector<Vec2> v;
    for (int k = 0; k < 5; ++k) {
      double a_out = kPi / 2.0 + 2.0 * kPi * k / 5.0;
      double a_in = a_out + kPi / 5.0;
      v.push_back({std::cos(a_out), std::sin(a_out)});
      v.push_back({0.45 * std::cos(a_in), 0.45 * std::sin(a_in)});
    }
    return polygon_validate(v);
  }
  fail("NonSimple", "unknown polygon preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Corner construction

Vec2 exterior_bisectrix(const Polygon& poly, int j) {
  Vec2 p = poly.vertex(j);
  Vec2 a = normalized(poly.vertex(j - 1) - p);
  Vec2 b = normalized(poly.vertex(j + 1) - p);
  Vec2 w = a + b;
  if (norm(w) < 1e-12) {
    // straight vertex: outward normal of the outgoing edge
    Vec2 e = normalized(poly.vertex(j + 1) - p);
    w = {e.y, -e.x};
  } else {
    w = normalized(w);
  }
  double eps = 1e-3 * poly.R0;
  if (poly.contains(p + eps * w)) w = -w;
  return w;
}

std::vector<Vec2> rounding_centers(const Polygon& poly, const RoundingParams& params) {
  int n = poly.size();
  std::vector<Vec2> centers(n);
  double d = params.rho / (2.0 * params.n);
  for (int j = 0; j < n; ++j) centers[j] = poly.vertex(j) + d * exterior_bisectrix(poly, j);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(centers[i], centers[j]) < poly.R)
        fail("SeparationViolated", "rounding centers closer than R");
  for (int j = 0; j < n; ++j)
    if (poly.distance(centers[j]) <= 0.0)
      fail("SeparationViolated", "rounding center inside the polygon");
  return centers;
}

namespace {

// Root structure of g(phi) = dist(circle point, polygon) - rho' at n = 1.
struct JunctionSolve {
  Vec2 q;        // same side as p_{j-1}
  Vec2 q_prime;  // same side as p_{j+1}
};

JunctionSolve junction_points_base(const Polygon& poly, const RoundingParams& params, int j) {
  Vec2 p = poly.vertex(j);
  Vec2 bis = exterior_bisectrix(poly, j);
  Vec2 center = p + (params.rho / 2.0) * bis;
  double radius = params.rho / 2.0;

  auto circle_point = [&](double phi) { return center + radius * rotate(bis, phi); };
  auto g = [&](double phi) { return poly.distance(circle_point(phi)) - params.rho_prime; };

  const int m = 2048;
  std::vector<double> phis(m), vals(m);
  for (int i = 0; i < m; ++i) {
    phis[i] = -kPi + 2.0 * kPi * i / m;
    vals[i] = g(phis[i]);
  }
  std::vector<std::pair<double, double>> brackets;
  for (int i = 0; i < m; ++i) {
    int k = (i + 1) % m;
    if (vals[i] == 0.0) brackets.emplace_back(phis[i], phis[i]);
    else if (vals[i] * vals[k] < 0.0)
      brackets.emplace_back(phis[i], phis[i] + 2.0 * kPi / m);
  }
  if (brackets.size() != 2)
    fail("Infeasible", "vertex " + std::to_string(j) + ": found " +
                           std::to_string(brackets.size()) + " offset roots, need 2");

  std::vector<Vec2> roots;
  for (auto [lo, hi] : brackets) {
    double flo = g(lo);
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = g(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if (flo * fm < 0.0) hi = mid;
      else {
        lo = mid;
        flo = fm;
      }
    }
    roots.push_back(circle_point(0.5 * (lo + hi)));
  }

  // each root's nearest polygon feature must be the interior of an edge
  // adjacent to vertex j, otherwise the straight parts would not be parallel
  int nedges = poly.size();
  int e_prev = ((j - 1) % nedges + nedges) % nedges;  // edge [p_{j-1}, p_j]
  int e_next = j;                                     // edge [p_j, p_{j+1}]
  for (const Vec2& q : roots) {
    int e;
    double t;
    poly.closest_edge(q, e, t);
    if (e != e_prev && e != e_next)
      fail("Infeasible", "offset root realized on a non-adjacent edge");
    if (t < 1e-12 || t > 1.0 - 1e-12)
      fail("Infeasible", "offset root realized at a polygon vertex");
  }

  double side_prev = cross(bis, poly.vertex(j - 1) - p);
  double s0 = cross(bis, roots[0] - p);
  double s1 = cross(bis, roots[1] - p);
  if (s0 * s1 >= 0.0) fail("Infeasible", "offset roots on the same side of the bisectrix");
  JunctionSolve out;
  if (s0 * side_prev > 0.0) {
    out.q = roots[0];
    out.q_prime = roots[1];
  } else {
    out.q = roots[1];
    out.q_prime = roots[0];
  }
  return out;
}

}  // namespace

std::pair<Vec2, Vec2> junction_points(const Polygon& poly, const RoundingParams& params, int j) {
  JunctionSolve base = junction_points_base(poly, params, j);
  if (params.n == 1) return {base.q, base.q_prime};
  Vec2 p = poly.vertex(j);
  double c = 1.0 / params.n;
  return {homothety(p, c, base.q), homothety(p, c, base.q_prime)};
}

// ---------------------------------------------------------------------------
// SmoothArc

namespace {
// 8-point Gauss-Legendre on [0,1]
constexpr double kGLx[8] = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                            0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                            0.8983332387068134, 0.9801449282487681};
constexpr double kGLw[8] = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436,
                            0.1813418916891810, 0.1813418916891810, 0.1568533229389436,
                            0.1111905172266872, 0.0506142681451881};

double warp_map(double t, double c) { return c * t / (1.0 + (c - 1.0) * t); }

Jet warp_jet(double t, double c, int ord) {
  Jet tv = Jet::variable(t, ord);
  Jet den = Jet::constant(1.0, ord) + (c - 1.0) * tv;
  return (c * tv) / den;
}
}  // namespace

SmoothArc::SmoothArc(Vec2 start, double len, double theta0, double dtheta, double warp_c)
    : start_(start), len_(len), th0_(theta0), dth_(dtheta), c_(warp_c) {
  build_prefix();
}

double SmoothArc::theta(double s) const {
  double t = std::clamp(s / len_, 0.0, 1.0);
  return th0_ + dth_ * smoothstep(warp_map(t, c_));
}

double SmoothArc::theta_deriv(double s, int k) const {
  double t = std::clamp(s / len_, 0.0, 1.0);
  int ord = k;
  Jet w = warp_jet(t, c_, ord);
  Jet S = smoothstep_jet(w.value(), ord);
  // compose S(w(t)) as jets, then scale t -> s
  Jet composed;
  composed.ord = ord;
  {
    Jet what = w;
    what.c[0] = 0.0;
    Jet p = Jet::constant(1.0, ord);
    composed = Jet::constant(S.c[0], ord);
    for (int i = 1; i <= ord; ++i) {
      p = p * what;
      composed = composed + S.c[i] * p;
    }
  }
  double scale = 1.0;
  for (int i = 0; i < k; ++i) scale /= len_;
  return dth_ * composed.deriv(k) * scale;
}

void SmoothArc::build_prefix() {
  panels_ = 64;
  prefix_.assign(panels_ + 1, Vec2{});
  Vec2 acc{};
  prefix_[0] = acc;
  for (int p = 0; p < panels_; ++p) {
    double s0 = len_ * p / panels_;
    double ds = len_ / panels_;
    Vec2 inc{};
    for (int q = 0; q < 8; ++q) {
      double th = theta(s0 + kGLx[q] * ds);
      inc += kGLw[q] * Vec2{std::cos(th), std::sin(th)};
    }
    acc += ds * inc;
    prefix_[p + 1] = acc;
  }
}

Vec2 SmoothArc::point(double s) const {
  s = std::clamp(s, 0.0, len_);
  double panel_len = len_ / panels_;
  int p = std::min(static_cast<int>(s / panel_len), panels_ - 1);
  double s0 = panel_len * p;
  Vec2 inc{};
  double ds = s - s0;
  if (ds > 0.0) {
    for (int q = 0; q < 8; ++q) {
      double th = theta(s0 + kGLx[q] * ds);
      inc += kGLw[q] * Vec2{std::cos(th), std::sin(th)};
    }
    inc = ds * inc;
  }
  return start_ + prefix_[p] + inc;
}

Vec2 SmoothArc::tangent(double s) const {
  double th = theta(s);
  return {std::cos(th), std::sin(th)};
}

SmoothArc SmoothArc::mapped(Vec2 center, double ratio) const {
  return SmoothArc(homothety(center, ratio, start_), ratio * len_, th0_, dth_, c_);
}

// ---------------------------------------------------------------------------
// Corner arc shooting

SmoothArc junction_curve(const Polygon& poly, const RoundingParams& params, int j) {
  JunctionSolve base = junction_points_base(poly, params, j);
  Vec2 p = poly.vertex(j);
  Vec2 center1 = p + (params.rho / 2.0) * exterior_bisectrix(poly, j);
  double radius1 = params.rho / 2.0;

  double th0 = std::atan2((p - poly.vertex(j - 1)).y, (p - poly.vertex(j - 1)).x);
  double th1 = std::atan2((poly.vertex(j + 1) - p).y, (poly.vertex(j + 1) - p).x);
  double dth = wrap_angle(th1 - th0);

  Vec2 target = base.q_prime - base.q;
  SmoothArc arc1;
  if (std::abs(dth) < 1e-9) {
    arc1 = SmoothArc(base.q, norm(target), th0, dth, 1.0);
  } else {
    // 2 unknowns (log L, log c) against the 2D endpoint condition
    double chord = norm(target);
    double half = std::abs(dth) / 2.0;
    double L = chord * (half > 1e-8 ? half / std::sin(half) : 1.0);
    double c = 1.0;
    auto endpoint_err = [&](double LL, double cc) {
      SmoothArc a(base.q, LL, th0, dth, cc);
      return a.end() - base.q_prime;
    };
    bool ok = false;
    Vec2 F = endpoint_err(L, c);
    for (int it = 0; it < 100; ++it) {
      if (norm(F) <= 1e-13 * std::max(L, chord)) {
        ok = true;
        break;
      }
      double hL = 1e-6 * L, hc = 1e-6 * std::max(c, 1e-3);
      Vec2 FL = endpoint_err(L + hL, c);
      Vec2 Fc = endpoint_err(L, c + hc);
      double a11 = (FL.x - F.x) / hL, a12 = (Fc.x - F.x) / hc;
      double a21 = (FL.y - F.y) / hL, a22 = (Fc.y - F.y) / hc;
      double det = a11 * a22 - a12 * a21;
      if (std::abs(det) < 1e-30) break;
      double dL = (-F.x * a22 + F.y * a12) / det;
      double dc = (-a11 * F.y + a21 * F.x) / det;
      // keep parameters positive
      double limit = 0.5;
      dL = std::clamp(dL, -limit * L, limit * L);
      dc = std::clamp(dc, -limit * std::max(c, 0.1), limit * std::max(c, 0.1));
      L += dL;
      c += dc;
      L = std::max(L, 0.1 * chord);
      c = std::clamp(c, 1e-3, 1e3);
      F = endpoint_err(L, c);
    }
    if (!ok && norm(F) > 1e-12 * std::max(L, chord))
      fail("ShootingDiverged", "corner arc endpoint not reached at vertex " + std::to_string(j));
    arc1 = SmoothArc(base.q, L, th0, dth, c);
  }

  // containment and separation inside B(p_{j1}, rho/2)
  const int samples = 256;
  std::vector<Vec2> pts(samples + 1);
  for (int i = 0; i <= samples; ++i) pts[i] = arc1.point(arc1.length() * i / samples);
  for (const Vec2& x : pts)
    if (dist(x, center1) > radius1 * (1.0 + 1e-9))
      fail("ContainmentViolated", "corner arc leaves its rounding ball at vertex " + std::to_string(j));
  if (!polyline_crossings_odd(p, center1, pts))
    fail("SeparationViolated", "corner arc does not separate the vertex from the center");

  if (params.n == 1) return arc1;
  return arc1.mapped(p, 1.0 / params.n);
}

// ---------------------------------------------------------------------------
// BoundaryPiece / RoundedDomain

Vec2 BoundaryPiece::point(double s) const {
  if (is_arc()) return std::get<SmoothArc>(geom).point(s);
  return std::get<Segment>(geom).point(s);
}

Vec2 BoundaryPiece::tangent(double s) const {
  if (is_arc()) return std::get<SmoothArc>(geom).tangent(s);
  return std::get<Segment>(geom).tangent();
}

double BoundaryPiece::curvature(double s) const {
  if (is_arc()) return std::get<SmoothArc>(geom).curvature(s);
  return 0.0;
}

void RoundedDomain::ensure_prefix() const {
  if (!prefix_.empty()) return;
  prefix_.resize(pieces.size() + 1, 0.0);
  for (size_t i = 0; i < pieces.size(); ++i) prefix_[i + 1] = prefix_[i] + pieces[i].length;
}

double RoundedDomain::boundary_length() const {
  ensure_prefix();
  return prefix_.back();
}

void RoundedDomain::locate(double t, int& piece, double& s) const {
  ensure_prefix();
  double total = prefix_.back();
  t = std::fmod(t, total);
  if (t < 0.0) t += total;
  auto it = std::upper_bound(prefix_.begin(), prefix_.end(), t);
  piece = std::clamp(static_cast<int>(it - prefix_.begin()) - 1, 0,
                     static_cast<int>(pieces.size()) - 1);
  s = t - prefix_[piece];
}

Vec2 RoundedDomain::boundary_point(double t) const {
  int p;
  double s;
  locate(t, p, s);
  return pieces[p].point(s);
}

Vec2 RoundedDomain::boundary_tangent(double t) const {
  int p;
  double s;
  locate(t, p, s);
  return pieces[p].tangent(s);
}

Vec2 RoundedDomain::outward_normal(double t) const {
  Vec2 tan = boundary_tangent(t);
  return {tan.y, -tan.x};
}

double RoundedDomain::boundary_curvature(double t) const {
  int p;
  double s;
  locate(t, p, s);
  return pieces[p].curvature(s);
}

std::vector<Vec2> RoundedDomain::sample_boundary(double tol) const {
  std::vector<Vec2> out;
  for (const BoundaryPiece& piece : pieces) {
    if (piece.is_arc()) {
      const SmoothArc& arc = std::get<SmoothArc>(piece.geom);
      // spacing so the chord sagitta stays below tol
      double kmax = 0.0;
      for (int i = 0; i <= 32; ++i)
        kmax = std::max(kmax, std::abs(arc.curvature(arc.length() * i / 32.0)));
      double spacing = kmax > 0.0 ? std::sqrt(8.0 * tol / kmax) : arc.length();
      int m = std::max(8, static_cast<int>(std::ceil(arc.length() / spacing)));
      for (int i = 0; i < m; ++i) out.push_back(arc.point(arc.length() * i / m));
    } else {
      out.push_back(std::get<Segment>(piece.geom).a);
    }
  }
  out.push_back(out.front());
  return out;
}

bool RoundedDomain::contains(Vec2 x) const {
  if (hull_cache_.empty()) hull_cache_ = sample_boundary(1e-9 * params.rho);
  bool inside = false;
  size_t n = hull_cache_.size() - 1;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = hull_cache_[i], b = hull_cache_[j];
    if ((a.y > x.y) != (b.y > x.y)) {
      double xi = a.x + (x.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (x.x < xi) inside = !inside;
    }
  }
  return inside;
}

double RoundedDomain::area() const {
  // shoelace over segments plus exact quadrature over arcs of x dy
  double s = 0.0;
  for (const BoundaryPiece& piece : pieces) {
    if (!piece.is_arc()) {
      const Segment& seg = std::get<Segment>(piece.geom);
      s += 0.5 * cross(seg.a, seg.b);
    } else {
      const SmoothArc& arc = std::get<SmoothArc>(piece.geom);
      const int panels = 64;
      double ds = arc.length() / panels;
      for (int p = 0; p < panels; ++p) {
        for (int q = 0; q < 8; ++q) {
          double si = ds * p + kGLx[q] * ds;
          Vec2 x = arc.point(si), tan = arc.tangent(si);
          s += 0.5 * kGLw[q] * ds * cross(x, tan);
        }
      }
    }
  }
  return s;
}

RoundedDomain construct_rounded_domain(const Polygon& poly, const RoundingParams& params) {
  if (!(params.rho > 0.0 && params.rho < poly.R0 / 2.0))
    fail("Infeasible", "rho must lie in (0, R0/2)");
  if (!(params.rho_prime > 0.0 && params.rho_prime <= params.rho / 4.0))
    fail("Infeasible", "rho' must lie in (0, rho/4]");
  if (params.n < 1) fail("Infeasible", "family index must be >= 1");

  int N = poly.size();
  RoundedDomain dom;
  dom.n = params.n;
  dom.params = params;
  dom.parent = poly;
  dom.punctures = rounding_centers(poly, params);

  std::vector<SmoothArc> arcs(N);
  std::vector<std::pair<Vec2, Vec2>> qs(N);
  for (int j = 0; j < N; ++j) {
    arcs[j] = junction_curve(poly, params, j);
    qs[j] = junction_points(poly, params, j);
  }

  int id = 0;
  for (int j = 0; j < N; ++j) {
    BoundaryPiece arc_piece;
    arc_piece.geom = arcs[j];
    arc_piece.id = id++;
    arc_piece.length = arcs[j].length();
    dom.pieces.push_back(arc_piece);

    Vec2 a = qs[j].second;                // q'_j
    Vec2 b = qs[(j + 1) % N].first;       // q_{j+1}
    if (dist(a, b) < 1e-12 * poly.R0) fail("Infeasible", "straight part has zero length");
    BoundaryPiece seg_piece;
    seg_piece.geom = Segment{a, b};
    seg_piece.id = id++;
    seg_piece.length = dist(a, b);
    dom.pieces.push_back(seg_piece);

    // parallelism to the parent edge
    Vec2 edge_dir = normalized(poly.vertex(j + 1) - poly.vertex(j));
    if (std::abs(cross(normalized(b - a), edge_dir)) > 1e-9)
      fail("Infeasible", "straight part not parallel to its parent edge");
  }

  // tangent continuity at junctions
  for (int j = 0; j < N; ++j) {
    Vec2 t_arc_end = arcs[j].tangent(arcs[j].length());
    const Segment& seg = std::get<Segment>(dom.pieces[2 * j + 1].geom);
    if (norm(t_arc_end - seg.tangent()) > 1e-9)
      fail("Infeasible", "tangent mismatch at arc end " + std::to_string(j));
    if (dist(arcs[j].end(), seg.a) > 1e-9 * poly.R0)
      fail("Infeasible", "arc endpoint mismatch at vertex " + std::to_string(j));
  }

  // global self-intersection sweep on a sampled polyline
  std::vector<Vec2> polyline = dom.sample_boundary(1e-6 * params.rho / params.n);
  size_t m = polyline.size() - 1;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      if (segments_properly_intersect(polyline[i], polyline[i + 1], polyline[j], polyline[j + 1]))
        fail("SelfIntersection", "boundary pieces cross");
    }
  }

  // containment of the parent polygon and exclusion of the punctures
  for (int j = 0; j < N; ++j) {
    if (!dom.contains(poly.vertex(j))) fail("ContainmentViolated", "parent vertex escapes the domain");
    if (dom.contains(dom.punctures[j])) fail("SeparationViolated", "puncture inside the domain");
  }

  return dom;
}

RoundingParams select_default_params(const Polygon& poly) {
  RoundingParams params;
  params.rho = poly.R0 / 4.0;
  params.n = 1;
  double rp = params.rho / 4.0;
  for (int attempt = 0; attempt < 40; ++attempt, rp *= 0.5) {
    params.rho_prime = rp;
    bool ok = true;
    int N = poly.size();
    std::vector<std::pair<Vec2, Vec2>> qs(N);
    try {
      for (int j = 0; j < N && ok; ++j) {
        qs[j] = junction_points(poly, params, j);
        junction_curve(poly, params, j);  // containment and separation
      }
    } catch (const Error&) {
      ok = false;
    }
    if (ok) {
      for (int j = 0; j < N; ++j) {
        Vec2 a = qs[j].second, b = qs[(j + 1) % N].first;
        Vec2 edge_dir = normalized(poly.vertex(j + 1) - poly.vertex(j));
        if (dist(a, b) < 1e-9 * poly.R0 || dot(b - a, edge_dir) <= 0.0) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return params;
  }
  fail("NoFeasibleRhoPrime", "no feasible rho' after 40 halvings");
}

// ---------------------------------------------------------------------------
// Exports

std::string boundary_svg_path(const RoundedDomain& dom) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const BoundaryPiece& piece : dom.pieces) {
    if (piece.is_arc()) {
      const SmoothArc& arc = std::get<SmoothArc>(piece.geom);
      const int m = 64;
      std::vector<Vec2> pts(m + 1);
      for (int i = 0; i <= m; ++i) pts[i] = arc.point(arc.length() * i / m);
      if (first) {
        os << "M " << pts[0].x << " " << pts[0].y << " ";
        first = false;
      }
      // Catmull-Rom through the samples, emitted as cubic Beziers
      for (int i = 0; i < m; ++i) {
        Vec2 p0 = pts[std::max(i - 1, 0)], p1 = pts[i], p2 = pts[i + 1], p3 = pts[std::min(i + 2, m)];
        Vec2 c1 = p1 + (p2 - p0) / 6.0;
        Vec2 c2 = p2 - (p3 - p1) / 6.0;
        os << "C " << c1.x << " " << c1.y << " " << c2.x << " " << c2.y << " " << p2.x << " "
           << p2.y << " ";
      }
    } else {
      const Segment& seg = std::get<Segment>(piece.geom);
      if (first) {
        os << "M " << seg.a.x << " " << seg.a.y << " ";
        first = false;
      }
      os << "L " << seg.b.x << " " << seg.b.y << " ";
    }
  }
  os << "Z";
  return os.str();
}

std::string boundary_polyline_text(const RoundedDomain& dom) {
  std::ostringstream os;
  os.precision(12);
  for (const BoundaryPiece& piece : dom.pieces) {
    int m = piece.is_arc() ? 64 : 8;
    for (int i = 0; i < m; ++i) {
      Vec2 x = piece.point(piece.length * i / m);
      os << x.x << " " << x.y << " " << piece.id << "\n";
    }
  }
  return os.str();
}

}  // namespace roundfem
