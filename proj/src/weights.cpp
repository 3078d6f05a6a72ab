#include "roundfem/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace roundfem {

namespace {
constexpr double kGLx8[8] = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                             0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                             0.8983332387068134, 0.9801449282487681};
constexpr double kGLw8[8] = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436,
                             0.1813418916891810, 0.1813418916891810, 0.1568533229389436,
                             0.1111905172266872, 0.0506142681451881};
constexpr int kEtaTab = 1024;
}  // namespace

// ---------------------------------------------------------------------------
// EtaProfile

EtaProfile::EtaProfile(double R, int kmax) : R_(R), kmax_(kmax) {
  t0_ = 7.0 * R / 48.0;
  w_ = R / 24.0;
  // cumulative integral of psi across the window; psi = 1 - S descends 1 -> 0
  itab_.assign(kEtaTab + 1, 0.0);
  double acc = 0.0;
  for (int i = 0; i < kEtaTab; ++i) {
    double a = static_cast<double>(i) / kEtaTab;
    double h = 1.0 / kEtaTab;
    double inc = 0.0;
    for (int q = 0; q < 8; ++q) inc += kGLw8[q] * (1.0 - smoothstep(a + kGLx8[q] * h));
    acc += h * inc;
    itab_[i + 1] = acc;
  }
}

double EtaProfile::psi(double t, int k) const {
  // k-th derivative of eta' at t inside the window
  double v = (t - t0_) / w_;
  Jet S = smoothstep_jet(v, k);
  double scale = 1.0;
  for (int i = 0; i < k; ++i) scale /= w_;
  return (k == 0 ? 1.0 - S.value() : -S.deriv(k)) * scale;
}

double EtaProfile::eval(double t, int k) const {
  if (t < 0.0) fail("NegativeT", "eta is defined on [0, inf)");
  if (k < 0 || k > kmax_) fail("OrderUnavailable", "derivative order beyond the profile cap");
  if (t <= t0_) {
    if (k == 0) return t;
    if (k == 1) return 1.0;
    return 0.0;
  }
  if (t >= t0_ + w_) {
    if (k == 0) return R_ / 6.0;
    return 0.0;
  }
  if (k == 0) {
    double v = (t - t0_) / w_;
    int i = std::min(static_cast<int>(v * kEtaTab), kEtaTab - 1);
    double a = static_cast<double>(i) / kEtaTab;
    double part = 0.0;
    double h = v - a;
    if (h > 0.0)
      for (int q = 0; q < 8; ++q) part += kGLw8[q] * (1.0 - smoothstep(a + kGLx8[q] * h));
    return std::min(t0_ + w_ * (itab_[i] + h * part), R_ / 6.0);
  }
  return psi(t, k - 1);
}

Jet EtaProfile::jet(double t, int ord) const {
  Jet j;
  j.ord = ord;
  double fact = 1.0;
  for (int k = 0; k <= ord; ++k) {
    if (k >= 2) fact *= k;
    j.c[k] = eval(t, k) / fact;
  }
  return j;
}

double eta_eval(const EtaProfile& profile, double t, int k) { return profile.eval(t, k); }

double log_derivative_A(const EtaProfile& profile, double t) {
  if (t <= 0.0) fail("NonPositiveT", "A(t) needs t > 0");
  return t * profile.eval(t, 1) / profile.eval(t, 0);
}

// ---------------------------------------------------------------------------
// WeightFunction

WeightFunction::WeightFunction(EtaProfile eta, std::vector<Vec2> punctures)
    : eta_(std::move(eta)), punctures_(std::move(punctures)) {}

double WeightFunction::puncture_distance(Vec2 x, int* which) const {
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (size_t i = 0; i < punctures_.size(); ++i) {
    double d = dist(x, punctures_[i]);
    if (d < best) {
      best = d;
      arg = static_cast<int>(i);
    }
  }
  if (which) *which = arg;
  return best;
}

double WeightFunction::r(Vec2 x) const {
  double d = puncture_distance(x);
  if (!std::isfinite(d)) return eta_.R() / 6.0;
  return eta_.eval(d, 0);
}

Vec2 WeightFunction::grad(Vec2 x) const {
  int which;
  double d = puncture_distance(x, &which);
  if (!std::isfinite(d) || d >= eta_.R() / 5.0) return {0.0, 0.0};
  if (d < 1e-12) fail("AtPuncture", "gradient requested at a puncture");
  Vec2 dir = (x - punctures_[which]) / d;
  return eta_.eval(d, 1) * dir;
}

Jet2 WeightFunction::jet(Vec2 x, int ord) const {
  if (ord < 0 || ord > kJetCap || ord > eta_.kmax())
    fail("OrderUnavailable", "derivative order beyond the weight cap");
  int which;
  double d = puncture_distance(x, &which);
  if (!std::isfinite(d) || d >= eta_.R() / 5.0)
    return Jet2::constant(eta_.R() / 6.0, ord);
  if (d < 1e-12) fail("AtPuncture", "derivatives requested at a puncture");
  Vec2 u = x - punctures_[which];
  Jet2 ux = Jet2::var_x(u.x, ord);
  Jet2 uy = Jet2::var_y(u.y, ord);
  Jet2 rho2 = ux * ux + uy * uy;
  Jet2 rho = compose(sqrt_series(rho2.value(), ord), rho2);
  return compose(eta_.jet(d, ord), rho);
}

double WeightFunction::deriv(Vec2 x, int ax, int ay) const {
  if (ax == 0 && ay == 0) return r(x);
  Jet2 j = jet(x, ax + ay);
  return j.deriv(ax, ay);
}

double WeightFunction::deriv_pow(Vec2 x, double b, int ax, int ay) const {
  int ord = ax + ay;
  Jet2 rj = jet(x, ord);
  Jet2 pj = compose(pow_series(rj.value(), b, ord), rj);
  return pj.deriv(ax, ay);
}

WeightFunction make_weight(const RoundedDomain& dom, int kmax) {
  return WeightFunction(EtaProfile(dom.parent.R, kmax), dom.punctures);
}

double weight_eval(const WeightFunction& w, Vec2 x, int ax, int ay) {
  if (w.puncture_distance(x) < 1e-12) fail("AtPuncture", "weight evaluated at a puncture");
  return w.deriv(x, ax, ay);
}

// ---------------------------------------------------------------------------
// Admissibility scans

double admissibility_scan(const WeightFunction& w, double b, int ax, int ay,
                          const std::vector<Vec2>& grid) {
  int total = ax + ay;
  double sup = 0.0;
  for (Vec2 x : grid) {
    if (w.puncture_distance(x) < 1e-8) fail("AtPuncture", "scan grid too close to a puncture");
    double val;
    if (total == 0) {
      val = 1.0;  // r^{-b} r^b
    } else {
      double rr = w.r(x);
      val = std::pow(rr, total - b) * w.deriv_pow(x, b, ax, ay);
    }
    sup = std::max(sup, std::abs(val));
  }
  return sup;
}

double admissibility_profile(const EtaProfile& eta, double b, int ax, int ay,
                             const std::vector<double>& radii, int angles) {
  WeightFunction single(eta, {Vec2{0.0, 0.0}});
  int total = ax + ay;
  double sup = 0.0;
  for (double rad : radii) {
    for (int a = 0; a < angles; ++a) {
      double phi = 2.0 * kPi * a / angles;
      Vec2 x{rad * std::cos(phi), rad * std::sin(phi)};
      double val;
      if (total == 0) {
        val = 1.0;
      } else {
        double rr = single.r(x);
        val = std::pow(rr, total - b) * single.deriv_pow(x, b, ax, ay);
      }
      sup = std::max(sup, std::abs(val));
    }
  }
  return sup;
}

std::vector<double> admissibility_radii(double R) {
  std::vector<double> radii = {R / 100.0, R / 10.0, R / 7.0, R / 5.5, R / 4.0};
  // fill in the transition window densely
  for (int i = 0; i <= 24; ++i) radii.push_back(R / 8.0 + (R / 5.0 - R / 8.0) * i / 24.0);
  for (int i = 1; i <= 8; ++i) radii.push_back(R / 50.0 * i);
  return radii;
}

// ---------------------------------------------------------------------------
// Conformal curvature

double conformal_curvature(Vec2 point, double kappa_euclid, Vec2 outward,
                           const WeightFunction& w) {
  if (w.puncture_distance(point) < 1e-12) fail("AtPuncture", "curvature at a puncture");
  return w.r(point) * kappa_euclid + dot(w.grad(point), outward);
}

double conformal_curvature(const RoundedDomain& dom, int piece, double s,
                           const WeightFunction& w) {
  const BoundaryPiece& p = dom.pieces[piece];
  Vec2 x = p.point(s);
  Vec2 tan = p.tangent(s);
  Vec2 outward{tan.y, -tan.x};
  return conformal_curvature(x, p.curvature(s), outward, w);
}

namespace {

// kappa as a function of the global Euclidean boundary parameter
double kappa_at(const RoundedDomain& dom, const WeightFunction& w, double t) {
  Vec2 x = dom.boundary_point(t);
  Vec2 tan = dom.boundary_tangent(t);
  Vec2 outward{tan.y, -tan.x};
  return conformal_curvature(x, dom.boundary_curvature(t), outward, w);
}

// k-fold derivative along conformal arc length by nested central
// differences; D f = r * df/dt with t Euclidean arc length.
double dkappa_at(const RoundedDomain& dom, const WeightFunction& w, double t, int k) {
  if (k == 0) return kappa_at(dom, w, t);
  double h = 1e-3 * w.r(dom.boundary_point(t));
  double fp = dkappa_at(dom, w, t + h, k - 1);
  double fm = dkappa_at(dom, w, t - h, k - 1);
  return w.r(dom.boundary_point(t)) * (fp - fm) / (2.0 * h);
}

}  // namespace

CurvatureProfile curvature_profile(const RoundedDomain& dom, const WeightFunction& w, int k,
                                   double resolution) {
  if (k < 0 || k > 4) fail("OrderUnavailable", "curvature derivatives supported for k <= 4");
  CurvatureProfile out;
  double total = dom.boundary_length();
  double t = 0.0, s_hat = 0.0;
  while (t < total) {
    Vec2 x = dom.boundary_point(t);
    double rr = w.r(x);
    int piece;
    double s;
    dom.locate(t, piece, s);
    out.piece_id.push_back(dom.pieces[piece].id);
    out.s_hat.push_back(s_hat);
    out.kappa.push_back(kappa_at(dom, w, t));
    out.dkappa.push_back(dkappa_at(dom, w, t, k));
    out.r.push_back(rr);
    double dt = resolution * rr;
    t += dt;
    s_hat += resolution;
  }
  for (double v : out.dkappa) out.sup_abs = std::max(out.sup_abs, std::abs(v));
  return out;
}

CurvatureProfile curvature_profile_arcs(const RoundedDomain& dom, const WeightFunction& w, int k,
                                        int samples_per_arc) {
  if (k < 0 || k > 4) fail("OrderUnavailable", "curvature derivatives supported for k <= 4");
  CurvatureProfile out;
  double prefix = 0.0;
  for (size_t p = 0; p < dom.pieces.size(); ++p) {
    const BoundaryPiece& piece = dom.pieces[p];
    if (piece.is_arc()) {
      for (int i = 1; i < samples_per_arc; ++i) {
        double s = piece.length * i / samples_per_arc;
        double t = prefix + s;
        out.piece_id.push_back(piece.id);
        out.s_hat.push_back(0.0);
        out.kappa.push_back(kappa_at(dom, w, t));
        out.dkappa.push_back(dkappa_at(dom, w, t, k));
        out.r.push_back(w.r(piece.point(s)));
      }
    }
    prefix += piece.length;
  }
  for (double v : out.dkappa) out.sup_abs = std::max(out.sup_abs, std::abs(v));
  return out;
}

std::string curvature_profile_csv(const CurvatureProfile& p) {
  std::ostringstream os;
  os.precision(12);
  os << "piece_id,s_hat,kappa,dkappa_ds,r\n";
  for (size_t i = 0; i < p.kappa.size(); ++i)
    os << p.piece_id[i] << "," << p.s_hat[i] << "," << p.kappa[i] << "," << p.dkappa[i] << ","
       << p.r[i] << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Geodesic length

ParamCurve circle_curve(Vec2 center, double radius) {
  ParamCurve c;
  c.t0 = 0.0;
  c.t1 = 2.0 * kPi;
  c.pos = [=](double t) { return center + radius * Vec2{std::cos(t), std::sin(t)}; };
  c.vel = [=](double t) { return radius * Vec2{-std::sin(t), std::cos(t)}; };
  return c;
}

ParamCurve segment_curve(Vec2 a, Vec2 b) {
  ParamCurve c;
  c.t0 = 0.0;
  c.t1 = 1.0;
  c.pos = [=](double t) { return a + t * (b - a); };
  c.vel = [=](double) { return b - a; };
  return c;
}

namespace {

double gl_integral(const std::function<double(double)>& f, double a, double b, int n) {
  double s = 0.0;
  for (int q = 0; q < n; ++q) s += kGLw8[q] * f(a + kGLx8[q] * (b - a));
  return (b - a) * s;
}

double adaptive_gl(const std::function<double(double)>& f, double a, double b, double whole,
                   double tol, int depth) {
  double mid = 0.5 * (a + b);
  double left = gl_integral(f, a, mid, 8);
  double right = gl_integral(f, mid, b, 8);
  if (depth > 40) return left + right;
  double err = std::abs(left + right - whole);
  if (err <= tol * std::abs(left + right) || err < 1e-300) return left + right;
  return adaptive_gl(f, a, mid, left, tol, depth + 1) +
         adaptive_gl(f, mid, b, right, tol, depth + 1);
}

}  // namespace

double geodesic_length(const ParamCurve& curve, const WeightFunction& w, double rel_tol) {
  auto f = [&](double t) {
    Vec2 x = curve.pos(t);
    double rr = w.r(x);
    if (w.puncture_distance(x) < 1e-12) fail("AtPuncture", "curve passes through a puncture");
    return norm(curve.vel(t)) / rr;
  };
  // split into panels first so narrow features are seen
  const int panels = 16;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = curve.t0 + (curve.t1 - curve.t0) * p / panels;
    double b = curve.t0 + (curve.t1 - curve.t0) * (p + 1) / panels;
    double whole = gl_integral(f, a, b, 8);
    total += adaptive_gl(f, a, b, whole, rel_tol, 0);
  }
  return total;
}

double geodesic_length(const std::vector<Vec2>& polyline, const WeightFunction& w) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < polyline.size(); ++i)
    total += geodesic_length(segment_curve(polyline[i], polyline[i + 1]), w, 1e-9);
  return total;
}

}  // namespace roundfem
