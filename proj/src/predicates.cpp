#include "roundfem/predicates.hpp"

#include <cmath>

namespace roundfem {

namespace {

// Error-free transformations (Dekker / Knuth).
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double bv = s - a;
  e = (a - (s - bv)) + (b - bv);
}

constexpr double kSplitter = 134217729.0;  // 2^27 + 1

inline void split(double a, double& hi, double& lo) {
  double c = kSplitter * a;
  hi = c - (c - a);
  lo = a - hi;
}

inline void two_product(double a, double b, double& p, double& e) {
  p = a * b;
  double ah, al, bh, bl;
  split(a, ah, al);
  split(b, bh, bl);
  e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
}

// Grow an expansion by one term; components come out in increasing
// magnitude, the invariant the sign test needs.
int grow_expansion(int elen, const double* e, double b, double* h) {
  double q = b;
  int hlen = 0;
  for (int i = 0; i < elen; ++i) {
    double s, err;
    two_sum(q, e[i], s, err);
    if (err != 0.0) h[hlen++] = err;
    q = s;
  }
  h[hlen++] = q;
  return hlen;
}

int sign_of_expansion(int len, const double* e) {
  for (int i = len - 1; i >= 0; --i) {
    if (e[i] > 0.0) return 1;
    if (e[i] < 0.0) return -1;
  }
  return 0;
}

int orient2d_exact(Vec2 a, Vec2 b, Vec2 c) {
  // det = ax by - ax cy - ay bx + ay cx + bx cy - by cx, products kept exact
  double terms[12];
  double p, e;
  two_product(a.x, b.y, p, e);
  terms[0] = e;
  terms[1] = p;
  two_product(-a.x, c.y, p, e);
  terms[2] = e;
  terms[3] = p;
  two_product(-a.y, b.x, p, e);
  terms[4] = e;
  terms[5] = p;
  two_product(a.y, c.x, p, e);
  terms[6] = e;
  terms[7] = p;
  two_product(b.x, c.y, p, e);
  terms[8] = e;
  terms[9] = p;
  two_product(-b.y, c.x, p, e);
  terms[10] = e;
  terms[11] = p;

  double acc[64], out[64];
  int len = 1;
  acc[0] = terms[0];
  for (int i = 1; i < 12; ++i) {
    len = grow_expansion(len, acc, terms[i], out);
    for (int k = 0; k < len; ++k) acc[k] = out[k];
  }
  return sign_of_expansion(len, acc);
}

// double-double arithmetic for the incircle fallback
struct DD {
  double hi = 0.0, lo = 0.0;
};

inline DD dd_from(double a) { return {a, 0.0}; }

inline DD dd_add(DD a, DD b) {
  double s, e;
  two_sum(a.hi, b.hi, s, e);
  e += a.lo + b.lo;
  double s2, e2;
  two_sum(s, e, s2, e2);
  return {s2, e2};
}

inline DD dd_sub(DD a, DD b) { return dd_add(a, {-b.hi, -b.lo}); }

inline DD dd_mul(DD a, DD b) {
  double p, e;
  two_product(a.hi, b.hi, p, e);
  e += a.hi * b.lo + a.lo * b.hi;
  double s, e2;
  two_sum(p, e, s, e2);
  return {s, e2};
}

}  // namespace

int orient2d(Vec2 a, Vec2 b, Vec2 c) {
  double detleft = (a.x - c.x) * (b.y - c.y);
  double detright = (a.y - c.y) * (b.x - c.x);
  double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    detsum = -detleft - detright;
  } else {
    return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
  }
  constexpr double errbound = 3.3306690738754716e-16;
  if (std::abs(det) >= errbound * detsum) return det > 0.0 ? 1 : -1;
  return orient2d_exact(a, b, c);
}

int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double adx = a.x - d.x, ady = a.y - d.y;
  double bdx = b.x - d.x, bdy = b.y - d.y;
  double cdx = c.x - d.x, cdy = c.y - d.y;

  double alift = adx * adx + ady * ady;
  double blift = bdx * bdx + bdy * bdy;
  double clift = cdx * cdx + cdy * cdy;

  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;

  double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);

  double permanent = alift * (std::abs(bdxcdy) + std::abs(cdxbdy)) +
                     blift * (std::abs(cdxady) + std::abs(adxcdy)) +
                     clift * (std::abs(adxbdy) + std::abs(bdxady));
  constexpr double errbound = 1.1102230246251565e-14;
  if (std::abs(det) > errbound * permanent) return det > 0.0 ? 1 : -1;

  // double-double fallback; values below the residual noise floor report 0
  // (treated as cocircular, so no flip happens and refinement terminates)
  DD ax = dd_sub(dd_from(a.x), dd_from(d.x)), ay = dd_sub(dd_from(a.y), dd_from(d.y));
  DD bx = dd_sub(dd_from(b.x), dd_from(d.x)), by = dd_sub(dd_from(b.y), dd_from(d.y));
  DD cx = dd_sub(dd_from(c.x), dd_from(d.x)), cy = dd_sub(dd_from(c.y), dd_from(d.y));

  DD al = dd_add(dd_mul(ax, ax), dd_mul(ay, ay));
  DD bl = dd_add(dd_mul(bx, bx), dd_mul(by, by));
  DD cl = dd_add(dd_mul(cx, cx), dd_mul(cy, cy));

  DD m1 = dd_sub(dd_mul(bx, cy), dd_mul(cx, by));
  DD m2 = dd_sub(dd_mul(cx, ay), dd_mul(ax, cy));
  DD m3 = dd_sub(dd_mul(ax, by), dd_mul(bx, ay));

  DD r = dd_add(dd_add(dd_mul(al, m1), dd_mul(bl, m2)), dd_mul(cl, m3));
  double noise = 1e-28 * permanent;
  if (r.hi > noise) return 1;
  if (r.hi < -noise) return -1;
  return 0;
}

}  // namespace roundfem
