#pragma once

#include <array>
#include <cmath>

#include "roundfem/core.hpp"

namespace roundfem {

// Truncated Taylor arithmetic. Coefficients are stored scaled, c[k] =
// f^(k)/k!, so products are plain Cauchy convolutions. Fixed capacity,
// runtime order.
inline constexpr int kJetCap = 6;  // highest coefficient index

struct Jet {
  std::array<double, kJetCap + 1> c{};
  int ord = 0;  // coefficients 0..ord are meaningful

  static Jet constant(double v, int ord) {
    Jet j;
    j.ord = ord;
    j.c[0] = v;
    return j;
  }
  static Jet variable(double v, int ord) {
    Jet j;
    j.ord = ord;
    j.c[0] = v;
    if (ord >= 1) j.c[1] = 1.0;
    return j;
  }
  double value() const { return c[0]; }
  /// k-th derivative (unscaled).
  double deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

inline Jet operator-(const Jet& a) {
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) r.c[k] = -a.c[k];
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}

inline Jet operator*(double s, const Jet& a) {
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) r.c[k] = s * a.c[k];
  return r;
}

inline Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.c[0] += s;
  return r;
}

inline Jet operator-(double s, const Jet& a) {
  Jet r = -a;
  r.c[0] += s;
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  // c = a/b via c[k] = (a[k] - sum_{i<k} c[i] b[k-i]) / b[0]
  Jet r;
  r.ord = a.ord;
  for (int k = 0; k <= a.ord; ++k) {
    double s = a.c[k];
    for (int i = 0; i < k; ++i) s -= r.c[i] * b.c[k - i];
    r.c[k] = s / b.c[0];
  }
  return r;
}

inline Jet exp(const Jet& a) {
  // (e^f)' = f' e^f  =>  k r[k] = sum_{i=1..k} i a[i] r[k-i]
  Jet r;
  r.ord = a.ord;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= a.ord; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
    r.c[k] = s / k;
  }
  return r;
}

// ---------------------------------------------------------------------------
// exp-bump smoothstep on [0,1]: S(t) = b(t) / (b(t) + b(1-t)), b(t)=exp(-1/t).
// S is C^inf, monotone, S(t)+S(1-t)=1, all derivatives vanish at 0 and 1.

inline double smoothstep(double t) {
  if (t <= 1e-8) return 0.0;
  if (t >= 1.0 - 1e-8) return 1.0;
  double b1 = std::exp(-1.0 / t);
  double b2 = std::exp(-1.0 / (1.0 - t));
  return b1 / (b1 + b2);
}

/// Value and derivatives of the smoothstep, as a jet in t.
inline Jet smoothstep_jet(double t, int ord) {
  if (t <= 1e-8) return Jet::constant(0.0, ord);
  if (t >= 1.0 - 1e-8) return Jet::constant(1.0, ord);
  Jet tv = Jet::variable(t, ord);
  Jet b1 = exp(-(Jet::constant(1.0, ord) / tv));
  Jet b2 = exp(-(Jet::constant(1.0, ord) / (1.0 - tv)));
  return b1 / (b1 + b2);
}

// ---------------------------------------------------------------------------
// Bivariate truncated Taylor series, total degree <= kJetCap. Index (i,j)
// with i+j <= ord, flattened by degree blocks.

struct Jet2 {
  // coefficient of X^i Y^j at flat index idx(i,j); scaled by 1/(i! j!)
  std::array<double, (kJetCap + 1) * (kJetCap + 2) / 2> c{};
  int ord = 0;

  static int idx(int i, int j) {
    int d = i + j;
    return d * (d + 1) / 2 + j;
  }
  double coeff(int i, int j) const { return c[idx(i, j)]; }
  double& coeff(int i, int j) { return c[idx(i, j)]; }

  static Jet2 constant(double v, int ord) {
    Jet2 r;
    r.ord = ord;
    r.c[0] = v;
    return r;
  }
  /// Series of the coordinate function x (resp. y) around the point.
  static Jet2 var_x(double v, int ord) {
    Jet2 r = constant(v, ord);
    if (ord >= 1) r.coeff(1, 0) = 1.0;
    return r;
  }
  static Jet2 var_y(double v, int ord) {
    Jet2 r = constant(v, ord);
    if (ord >= 1) r.coeff(0, 1) = 1.0;
    return r;
  }
  double value() const { return c[0]; }
  /// Mixed partial d^(i+j) / dx^i dy^j (unscaled).
  double deriv(int i, int j) const {
    double f = 1.0;
    for (int k = 2; k <= i; ++k) f *= k;
    for (int k = 2; k <= j; ++k) f *= k;
    return coeff(i, j) * f;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.ord = a.ord;
  int n = Jet2::idx(0, a.ord) + 1;
  for (int k = 0; k < n; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.ord = a.ord;
  int n = Jet2::idx(0, a.ord) + 1;
  for (int k = 0; k < n; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

inline Jet2 operator*(double s, const Jet2& a) {
  Jet2 r;
  r.ord = a.ord;
  int n = Jet2::idx(0, a.ord) + 1;
  for (int k = 0; k < n; ++k) r.c[k] = s * a.c[k];
  return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.ord = a.ord;
  for (int da = 0; da <= a.ord; ++da)
    for (int ia = 0; ia <= da; ++ia) {
      int ja = da - ia;
      double ca = a.coeff(ia, ja);
      if (ca == 0.0) continue;
      for (int db = 0; db + da <= a.ord; ++db)
        for (int ib = 0; ib <= db; ++ib) {
          int jb = db - ib;
          r.coeff(ia + ib, ja + jb) += ca * b.coeff(ib, jb);
        }
    }
  return r;
}

/// Compose a univariate function (given by its Taylor coefficients f_k =
/// f^(k)(g0)/k! around g0 = g.value()) with a bivariate series g.
inline Jet2 compose(const Jet& f, const Jet2& g) {
  Jet2 ghat = g;
  ghat.c[0] = 0.0;  // g - g0
  Jet2 r = Jet2::constant(f.c[0], g.ord);
  Jet2 p = Jet2::constant(1.0, g.ord);
  for (int k = 1; k <= g.ord; ++k) {
    p = p * ghat;
    r = r + f.c[k] * p;
  }
  return r;
}

/// Taylor coefficients of t -> t^b at t0 > 0 (scaled by 1/k!).
inline Jet pow_series(double t0, double b, int ord) {
  Jet f;
  f.ord = ord;
  double coef = std::pow(t0, b);
  f.c[0] = coef;
  for (int k = 1; k <= ord; ++k) {
    coef *= (b - (k - 1)) / (k * t0);
    f.c[k] = coef;
  }
  return f;
}

/// Taylor coefficients of sqrt at t0 > 0.
inline Jet sqrt_series(double t0, int ord) { return pow_series(t0, 0.5, ord); }

}  // namespace roundfem
