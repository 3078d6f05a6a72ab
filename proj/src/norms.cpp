#include "roundfem/norms.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace roundfem {

double integrate(const Mesh& mesh, const std::function<double(Vec2)>& f, int degree) {
  const QuadratureRule& rule = triangle_rule(degree);
  double acc = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be = element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q]);
      acc += be.weight * f(be.x);
    }
  return acc;
}

namespace {

int quad_degree_near(const WeightFunction* w, const Mesh& mesh, int t) {
  if (!w) return 4;
  const auto& tri = mesh.triangles[t];
  Vec2 centroid = (mesh.nodes[tri[0]] + mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) / 3.0;
  return w->puncture_distance(centroid) < w->eta().R() / 5.0 ? 6 : 4;
}

// shared accumulation: per quadrature point contributions of orders 0..m
double norm_accumulate(const Mesh& mesh, const WeightFunction* w, int m, double a,
                       const std::function<FieldSample(const BasisEval&, int)>& sample_at) {
  double acc = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    int degree = quad_degree_near(w, mesh, static_cast<int>(t));
    const QuadratureRule& rule = triangle_rule(degree);
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be =
          element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q], m >= 2);
      FieldSample fs = sample_at(be, static_cast<int>(t));
      double rr = w ? w->r(be.x) : 1.0;
      double term = std::pow(rr, -2.0 * a) * fs.u * fs.u;
      if (m >= 1) term += std::pow(rr, 2.0 * (1.0 - a)) * norm2(fs.grad);
      if (m >= 2)
        term += std::pow(rr, 2.0 * (2.0 - a)) *
                (fs.hess[0] * fs.hess[0] + fs.hess[1] * fs.hess[1] + fs.hess[2] * fs.hess[2]);
      acc += be.weight * term;
    }
  }
  return std::sqrt(acc);
}

FieldSample fem_sample(const FemSolution& sol, const BasisEval& be, int t, int m) {
  FieldSample fs;
  int per_elem = sol.order == 2 ? 6 : 3;
  for (int i = 0; i < per_elem; ++i) {
    double c = sol.coeffs[element_dof(*sol.mesh, t, i)];
    fs.u += c * be.N[i];
    fs.grad += c * be.dN[i];
    if (m >= 2)
      for (int k = 0; k < 3; ++k) fs.hess[k] += c * be.d2N[i][k];
  }
  return fs;
}

void require_order(const FemSolution& sol, int m) {
  if (m >= 2 && sol.order < 2)
    fail("OrderUnavailable", "second derivatives need order-2 elements");
}

}  // namespace

double kondratiev_norm(const FemSolution& sol, const WeightFunction& w, int m, double a) {
  require_order(sol, m);
  return norm_accumulate(*sol.mesh, &w, m, a,
                         [&](const BasisEval& be, int t) { return fem_sample(sol, be, t, m); });
}

double kondratiev_norm(const Mesh& mesh, const ScalarField& field, const WeightFunction& w, int m,
                       double a) {
  return norm_accumulate(mesh, &w, m, a,
                         [&](const BasisEval& be, int) { return field(be.x); });
}

double sobolev_norm(const FemSolution& sol, int m) {
  require_order(sol, m);
  return norm_accumulate(*sol.mesh, nullptr, m, 0.0,
                         [&](const BasisEval& be, int t) { return fem_sample(sol, be, t, m); });
}

double sobolev_norm(const Mesh& mesh, const ScalarField& field, int m) {
  return norm_accumulate(mesh, nullptr, m, 0.0,
                         [&](const BasisEval& be, int) { return field(be.x); });
}

double kondratiev_norm_shifted(const FemSolution& sol, const WeightFunction& w, int m, double a,
                               double b) {
  require_order(sol, m);
  return norm_accumulate(*sol.mesh, &w, m, a, [&](const BasisEval& be, int t) {
    FieldSample u = fem_sample(sol, be, t, m);
    // derivatives of r^b u by the product rule
    double rb = w.deriv_pow(be.x, b, 0, 0);
    double rb_x = w.deriv_pow(be.x, b, 1, 0);
    double rb_y = w.deriv_pow(be.x, b, 0, 1);
    FieldSample out;
    out.u = rb * u.u;
    out.grad = {rb * u.grad.x + rb_x * u.u, rb * u.grad.y + rb_y * u.u};
    if (m >= 2) {
      double rb_xx = w.deriv_pow(be.x, b, 2, 0);
      double rb_xy = w.deriv_pow(be.x, b, 1, 1);
      double rb_yy = w.deriv_pow(be.x, b, 0, 2);
      out.hess[0] = rb * u.hess[0] + 2.0 * rb_x * u.grad.x + rb_xx * u.u;
      out.hess[1] = rb * u.hess[1] + rb_x * u.grad.y + rb_y * u.grad.x + rb_xy * u.u;
      out.hess[2] = rb * u.hess[2] + 2.0 * rb_y * u.grad.y + rb_yy * u.u;
    }
    return out;
  });
}

// ---------------------------------------------------------------------------
// Gagliardo seminorm

namespace {

struct TriGeom {
  Vec2 v[3];
  Vec2 centroid() const { return (v[0] + v[1] + v[2]) / 3.0; }
  double radius() const {
    Vec2 c = centroid();
    return std::max({dist(c, v[0]), dist(c, v[1]), dist(c, v[2])});
  }
  double area() const { return 0.5 * cross(v[1] - v[0], v[2] - v[0]); }
};

double pair_quadrature(const TriGeom& A, const TriGeom& B, const std::function<Vec2(Vec2)>& f,
                       double s, bool identical) {
  const QuadratureRule& r1 = triangle_rule(4);
  const QuadratureRule& r2 = identical ? triangle_rule(6) : triangle_rule(4);
  double a1 = 2.0 * A.area(), a2 = 2.0 * B.area();  // rule weights sum to 1/2
  double acc = 0.0;
  double expo = 1.0 + s;  // |x-y|^(2+2s) = (|x-y|^2)^(1+s)
  for (size_t i = 0; i < r1.bary.size(); ++i) {
    Vec2 x = r1.bary[i][0] * A.v[0] + r1.bary[i][1] * A.v[1] + r1.bary[i][2] * A.v[2];
    Vec2 fx = f(x);
    for (size_t j = 0; j < r2.bary.size(); ++j) {
      Vec2 y = r2.bary[j][0] * B.v[0] + r2.bary[j][1] * B.v[1] + r2.bary[j][2] * B.v[2];
      double d2 = norm2(x - y);
      if (d2 == 0.0) continue;
      acc += r1.weights[i] * a1 * r2.weights[j] * a2 * norm2(fx - f(y)) / std::pow(d2, expo);
    }
  }
  return acc;
}

double pair_integral(const TriGeom& A, const TriGeom& B, const std::function<Vec2(Vec2)>& f,
                     double s, bool identical, int depth) {
  double sep = dist(A.centroid(), B.centroid()) - A.radius() - B.radius();
  double diam = std::max(A.radius(), B.radius());
  if (depth >= 4 || sep > diam) return pair_quadrature(A, B, f, s, identical);
  // split the larger triangle into four midpoint children
  const TriGeom& big = (A.radius() >= B.radius()) ? A : B;
  const TriGeom& small = (A.radius() >= B.radius()) ? B : A;
  Vec2 m01 = 0.5 * (big.v[0] + big.v[1]);
  Vec2 m12 = 0.5 * (big.v[1] + big.v[2]);
  Vec2 m20 = 0.5 * (big.v[2] + big.v[0]);
  TriGeom kids[4] = {{{big.v[0], m01, m20}}, {{m01, big.v[1], m12}},
                     {{m20, m12, big.v[2]}}, {{m01, m12, m20}}};
  double acc = 0.0;
  if (identical) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        acc += pair_integral(kids[i], kids[j], f, s, i == j, depth + 1);
  } else {
    for (int i = 0; i < 4; ++i) acc += pair_integral(kids[i], small, f, s, false, depth + 1);
  }
  return acc;
}

}  // namespace

double gagliardo_seminorm(const Mesh& mesh, const std::function<Vec2(Vec2)>& field, double s) {
  if (s <= 0.05 || s >= 0.95) fail("TooManyElements", "s outside (0.05, 0.95)");
  size_t n = mesh.triangles.size();
  if (n > 2000) fail("TooManyElements", "gagliardo_seminorm is quadratic; mesh too fine");
  std::vector<TriGeom> tris(n);
  for (size_t t = 0; t < n; ++t)
    tris[t] = {{mesh.nodes[mesh.triangles[t][0]], mesh.nodes[mesh.triangles[t][1]],
                mesh.nodes[mesh.triangles[t][2]]}};
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) acc += pair_integral(tris[i], tris[j], field, s, i == j, 0);
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Reports

NormReport ratio_report(const RoundedDomain& dom, const Mesh& mesh, const FemSolution& sol,
                        const std::function<double(Vec2)>& f, const WeightFunction& w, double a) {
  NormReport r;
  r.n = dom.n;
  r.a = a;
  r.m = 2;
  r.dofs = num_dofs(mesh);
  MeshQuality q = mesh_quality(mesh);
  r.h = q.h_max;
  r.l2_f = std::sqrt(integrate(mesh, [&](Vec2 x) {
    double v = f(x);
    return v * v;
  }));
  r.k21a = kondratiev_norm(sol, w, 2, 1.0 + a);
  r.h1 = sobolev_norm(sol, 1);
  if (r.l2_f > 0.0) {
    r.ratio = r.k21a / r.l2_f;
    r.ratio_defined = true;
  } else {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    r.ratio_defined = false;
  }
  return r;
}

std::string norm_report_csv_header() { return "n,a,m,h,dofs,l2_f,k21a,h1,ratio,gagliardo"; }

std::string norm_report_csv_row(const NormReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.n << "," << r.a << "," << r.m << "," << r.h << "," << r.dofs << "," << r.l2_f << ","
     << r.k21a << "," << r.h1 << ",";
  if (r.ratio_defined) os << r.ratio;
  else os << "nan";
  os << ",";
  if (r.gagliardo) os << *r.gagliardo;
  return os.str();
}

FemSolution random_fem_field(const Mesh& mesh, int order, unsigned long seed) {
  FemSolution sol;
  sol.mesh = &mesh;
  sol.order = order;
  sol.coeffs.resize(num_dofs(mesh));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& c : sol.coeffs) c = gauss(rng);
  return sol;
}

double shift_bound(const EtaProfile& eta, double b) {
  // S_gamma = sup |r^{|gamma|-b} d^gamma r^b| over the radial profile
  auto radii = admissibility_radii(eta.R());
  auto S = [&](int ax, int ay) {
    if (ax == 0 && ay == 0) return 1.0;
    return admissibility_profile(eta, b, ax, ay, radii);
  };
  const int alphas[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  auto binom = [](int n, int k) { return (k == 0 || k == n) ? 1.0 : static_cast<double>(n); };
  double total = 0.0;
  for (auto& alpha : alphas) {
    double inner = 0.0;
    for (int b1 = 0; b1 <= alpha[0]; ++b1)
      for (int b2 = 0; b2 <= alpha[1]; ++b2)
        inner += binom(alpha[0], b1) * binom(alpha[1], b2) * S(alpha[0] - b1, alpha[1] - b2);
    total += inner * inner;
  }
  return std::sqrt(total);
}

}  // namespace roundfem
