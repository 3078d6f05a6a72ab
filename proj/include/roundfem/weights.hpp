#pragma once

#include <array>
#include <functional>
#include <vector>

#include "roundfem/core.hpp"
#include "roundfem/geometry.hpp"
#include "roundfem/taylor.hpp"

namespace roundfem {

/// The radial profile eta: eta(t) = t for t <= R/8, eta(t) = R/6 for
/// t >= R/5, smooth and non-decreasing in between. Built as the integral of
/// a descending exp-bump smoothstep over the window [7R/48, 3R/16]; the
/// window is centered so that eta(R/5) = R/6 holds exactly.
class EtaProfile {
 public:
  explicit EtaProfile(double R, int kmax = 5);

  double R() const { return R_; }
  double t0() const { return t0_; }
  double window() const { return w_; }
  int kmax() const { return kmax_; }

  /// k-th derivative of eta at t >= 0.
  double eval(double t, int k = 0) const;
  double operator()(double t) const { return eval(t, 0); }

  /// Taylor coefficients of eta at t (scaled by 1/k!), order <= kmax.
  Jet jet(double t, int ord) const;

 private:
  double psi(double t, int k) const;  // window profile, eta' on [t0, t0+w]
  double R_ = 1.0, t0_ = 0.0, w_ = 0.0;
  int kmax_ = 5;
  std::vector<double> itab_;  // cumulative integral of psi over the window
};

double eta_eval(const EtaProfile& profile, double t, int k);

/// A = t eta'(t) / eta(t); equals 1 near zero and 0 beyond the window.
double log_derivative_A(const EtaProfile& profile, double t);

/// r(x) = eta(dist(x, V_n)) and its derivatives; defines the conformal
/// metric r^{-2} dx^2. With no punctures r is the constant R/6.
class WeightFunction {
 public:
  WeightFunction(EtaProfile eta, std::vector<Vec2> punctures);

  const EtaProfile& eta() const { return eta_; }
  const std::vector<Vec2>& punctures() const { return punctures_; }

  double r(Vec2 x) const;
  Vec2 grad(Vec2 x) const;
  /// d^(ax+ay) r / dx^ax dy^ay.
  double deriv(Vec2 x, int ax, int ay) const;
  /// d^alpha (r^b).
  double deriv_pow(Vec2 x, double b, int ax, int ay) const;
  /// Bivariate Taylor series of r around x (order ord <= kmax).
  Jet2 jet(Vec2 x, int ord) const;
  /// Distance to the puncture set (infinity when empty).
  double puncture_distance(Vec2 x, int* which = nullptr) const;

 private:
  EtaProfile eta_;
  std::vector<Vec2> punctures_;
};

/// Weight for a rounded domain: punctures V_n, separation radius from the
/// parent polygon.
WeightFunction make_weight(const RoundedDomain& dom, int kmax = 5);

double weight_eval(const WeightFunction& w, Vec2 x, int ax, int ay);

/// sup over the grid of |r^{|alpha|-b} d^alpha (r^b)|.
double admissibility_scan(const WeightFunction& w, double b, int ax, int ay,
                          const std::vector<Vec2>& grid);

/// Same supremum computed on the single-puncture radial profile: rings at
/// the given radii (plus the far zone). By construction identical for every
/// puncture and every family index.
double admissibility_profile(const EtaProfile& eta, double b, int ax, int ay,
                             const std::vector<double>& radii, int angles = 64);

/// Default radii for admissibility scans.
std::vector<double> admissibility_radii(double R);

/// Geodesic curvature in the metric r^{-2} dx^2 of a curve through `point`
/// with Euclidean curvature `kappa_euclid` (w.r.t. `outward`, the Euclidean
/// unit normal): kappa = r * kappa_euclid + <grad r, outward>.
double conformal_curvature(Vec2 point, double kappa_euclid, Vec2 outward,
                           const WeightFunction& w);

/// Same for a boundary piece of a rounded domain at arc-length s.
double conformal_curvature(const RoundedDomain& dom, int piece, double s,
                           const WeightFunction& w);

struct CurvatureProfile {
  std::vector<int> piece_id;
  std::vector<double> s_hat;   // arc length in the conformal metric
  std::vector<double> kappa;   // geodesic curvature
  std::vector<double> dkappa;  // k-th derivative along s_hat
  std::vector<double> r;
  double sup_abs = 0.0;        // sup |dkappa|
};

/// Samples d^k kappa / ds^k along the whole boundary, s measured in the
/// conformal metric. Derivatives by nested central differences with step
/// 1e-3 * r in conformal arc length.
CurvatureProfile curvature_profile(const RoundedDomain& dom, const WeightFunction& w, int k,
                                   double resolution = 0.02);

/// Same but restricted to the corner arcs; sample fractions are fixed per
/// arc so values correspond across family indices.
CurvatureProfile curvature_profile_arcs(const RoundedDomain& dom, const WeightFunction& w, int k,
                                        int samples_per_arc = 128);

std::string curvature_profile_csv(const CurvatureProfile& p);

struct ParamCurve {
  std::function<Vec2(double)> pos;
  std::function<Vec2(double)> vel;
  double t0 = 0.0, t1 = 1.0;
};

ParamCurve circle_curve(Vec2 center, double radius);
ParamCurve segment_curve(Vec2 a, Vec2 b);

/// Length of the curve in the metric r^{-2} dx^2, adaptive quadrature with
/// relative tolerance rel_tol.
double geodesic_length(const ParamCurve& curve, const WeightFunction& w, double rel_tol = 1e-8);
double geodesic_length(const std::vector<Vec2>& polyline, const WeightFunction& w);

}  // namespace roundfem
