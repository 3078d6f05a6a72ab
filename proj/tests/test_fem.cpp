#include "roundfem/fem.hpp"

#include <cmath>

#include "doctest.h"

using namespace roundfem;

namespace {

SizingField uniform_sizing(double h) {
  SizingField s;
  s.h_max = h;
  s.h_min = h * 1e-4;
  return s;
}

Mesh unit_square_mesh(double h, int order) {
  Polygon sq = polygon_preset("square");
  return triangulate(polygon_boundary(sq, uniform_sizing(h)), uniform_sizing(h), order);
}

// L2 error of a solution against an exact field, degree-6 quadrature
double l2_error(const FemSolution& sol, const std::function<double(Vec2)>& exact) {
  const Mesh& mesh = *sol.mesh;
  int per_elem = sol.order == 2 ? 6 : 3;
  const QuadratureRule& rule = triangle_rule(6);
  double acc = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be = element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q]);
      double uh = 0.0;
      for (int i = 0; i < per_elem; ++i)
        uh += sol.coeffs[element_dof(mesh, static_cast<int>(t), i)] * be.N[i];
      double d = uh - exact(be.x);
      acc += be.weight * d * d;
    }
  return std::sqrt(acc);
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
  // least squares slope of log(err) against log(h)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(h.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("assemble: reference right triangle P1 stiffness") {
  Mesh mesh;
  mesh.nodes = {{0, 0}, {1, 0}, {0, 1}};
  mesh.num_vertices = 3;
  mesh.node_marker = {-1, -1, -1};
  mesh.triangles = {{0, 1, 2}};
  mesh.order = 1;
  PoissonOperators ops = assemble_poisson(mesh, 1);
  auto K = [&](int i, int j) {
    for (int k = ops.stiffness.row_offsets[i]; k < ops.stiffness.row_offsets[i + 1]; ++k)
      if (ops.stiffness.cols[k] == j) return ops.stiffness.vals[k];
    return 0.0;
  };
  CHECK(K(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(K(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(K(0, 2) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(K(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(K(1, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(K(2, 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("assemble: row sums and mass total") {
  Mesh mesh = unit_square_mesh(0.18, 1);
  PoissonOperators ops = assemble_poisson(mesh, 1);
  for (int i = 0; i < ops.dofs; ++i) {
    double s = 0.0;
    for (int k = ops.stiffness.row_offsets[i]; k < ops.stiffness.row_offsets[i + 1]; ++k)
      s += ops.stiffness.vals[k];
    CHECK(std::abs(s) < 1e-12);
  }
  double total = 0.0;
  for (double v : ops.mass.vals) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ops.stiffness.symmetry_defect() < 1e-13);
}

TEST_CASE("solve_dirichlet: zero source gives the zero solution") {
  Mesh mesh = unit_square_mesh(0.2, 1);
  FemSolution sol = solve_dirichlet(mesh, 1, source_preset("zero", {0, 0}, 1.0));
  for (double c : sol.coeffs) CHECK(c == 0.0);
}

TEST_CASE("solve_dirichlet: manufactured sine solution, P1 rate 2") {
  auto exact = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  std::vector<double> hs = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0};
  std::vector<double> errs;
  for (double h : hs) {
    Mesh mesh = unit_square_mesh(h, 1);
    FemSolution sol = solve_dirichlet(mesh, 1, source_preset("sine", {0, 0}, 1.0));
    errs.push_back(l2_error(sol, exact));
  }
  double slope = fit_slope(hs, errs);
  CHECK(slope > 1.8);
  CHECK(slope < 2.3);
}

TEST_CASE("solve_dirichlet: P2 rate at least 2.7") {
  auto exact = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  std::vector<double> hs = {1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0};
  std::vector<double> errs;
  for (double h : hs) {
    Mesh mesh = unit_square_mesh(h, 2);
    FemSolution sol = solve_dirichlet(mesh, 2, source_preset("sine", {0, 0}, 1.0));
    errs.push_back(l2_error(sol, exact));
  }
  CHECK(fit_slope(hs, errs) >= 2.7);
}

TEST_CASE("solve_dirichlet: linearity") {
  Mesh mesh = unit_square_mesh(0.15, 1);
  auto f1 = source_preset("sine", {0, 0}, 1.0);
  auto f2 = source_preset("bump", {0.5, 0.5}, 1.0);
  FemSolution s1 = solve_dirichlet(mesh, 1, f1);
  FemSolution s2 = solve_dirichlet(mesh, 1, f2);
  FemSolution s12 = solve_dirichlet(mesh, 1, [&](Vec2 x) { return f1(x) + 2.0 * f2(x); });
  double scale = 0.0;
  for (double c : s12.coeffs) scale = std::max(scale, std::abs(c));
  for (size_t i = 0; i < s12.coeffs.size(); ++i)
    CHECK(std::abs(s12.coeffs[i] - (s1.coeffs[i] + 2.0 * s2.coeffs[i])) < 1e-8 * scale);
}

TEST_CASE("solve_dirichlet: energy identity and maximum principle") {
  Mesh mesh = unit_square_mesh(0.1, 1);
  auto f = [](Vec2) { return -1.0; };
  FemSolution sol = solve_dirichlet(mesh, 1, f);
  PoissonOperators ops = assemble_poisson(mesh, 1);

  // u^T K u should equal -int f u
  std::vector<double> Ku;
  ops.stiffness.multiply(sol.coeffs, Ku);
  double energy = 0.0;
  for (size_t i = 0; i < Ku.size(); ++i) energy += sol.coeffs[i] * Ku[i];
  double load = 0.0;
  const QuadratureRule& rule = triangle_rule(6);
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be = element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q]);
      double uh = 0.0;
      for (int i = 0; i < 3; ++i)
        uh += sol.coeffs[element_dof(mesh, static_cast<int>(t), i)] * be.N[i];
      load -= be.weight * f(be.x) * uh;
    }
  CHECK(energy == doctest::Approx(load).epsilon(1e-8));

  // f <= 0 everywhere gives u >= 0 on Delaunay meshes
  for (double c : sol.coeffs) CHECK(c >= -1e-12);
}

TEST_CASE("weighted_eigen_min: classical unit square value") {
  // r == 1 via a puncture-free weight with R = 6
  WeightFunction w(EtaProfile(6.0), {});
  Mesh mesh = unit_square_mesh(1.0 / 16.0, 2);
  double lambda = weighted_eigen_min(mesh, 2, w);
  CHECK(lambda == doctest::Approx(2.0 * kPi * kPi).epsilon(0.01));
}

TEST_CASE("weighted_eigen_min: constant factor scaling") {
  Mesh mesh = unit_square_mesh(1.0 / 12.0, 2);
  WeightFunction w1(EtaProfile(6.0), {});   // r = 1
  WeightFunction w2(EtaProfile(3.0), {});   // r = 1/2
  double l1 = weighted_eigen_min(mesh, 2, w1);
  double l2 = weighted_eigen_min(mesh, 2, w2);
  CHECK(l2 == doctest::Approx(0.25 * l1).epsilon(1e-6));
}

TEST_CASE("evaluate: reproduction of linears and quadratics") {
  Mesh mesh1 = unit_square_mesh(0.3, 1);
  FemSolution lin;
  lin.mesh = &mesh1;
  lin.order = 1;
  lin.coeffs.resize(mesh1.nodes.size());
  for (size_t i = 0; i < mesh1.nodes.size(); ++i) lin.coeffs[i] = mesh1.nodes[i].x;
  for (Vec2 x : {Vec2{0.3, 0.4}, Vec2{0.71, 0.11}, Vec2{0.5, 0.99}}) {
    PointValue pv = evaluate(lin, x, 2);
    CHECK(pv.u == doctest::Approx(x.x).epsilon(1e-13));
    CHECK(pv.grad.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(pv.grad.y) < 1e-12);
    CHECK(pv.hess[0] == 0.0);  // P1 Hessian is zero by construction
  }

  Mesh mesh2 = unit_square_mesh(0.3, 2);
  FemSolution quad;
  quad.mesh = &mesh2;
  quad.order = 2;
  quad.coeffs.resize(mesh2.nodes.size());
  for (size_t i = 0; i < mesh2.nodes.size(); ++i) quad.coeffs[i] = mesh2.nodes[i].x * mesh2.nodes[i].x;
  for (Vec2 x : {Vec2{0.25, 0.6}, Vec2{0.8, 0.33}}) {
    PointValue pv = evaluate(quad, x, 2);
    CHECK(pv.u == doctest::Approx(x.x * x.x).epsilon(1e-12));
    CHECK(pv.hess[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(pv.hess[1]) < 1e-10);
    CHECK(std::abs(pv.hess[2]) < 1e-10);
  }
}

TEST_CASE("evaluate: gradient of the manufactured solution") {
  Mesh mesh = unit_square_mesh(1.0 / 24.0, 1);
  FemSolution sol = solve_dirichlet(mesh, 1, source_preset("sine", {0, 0}, 1.0));
  double h = 1.0 / 24.0;
  double worst = 0.0;
  for (Vec2 x : {Vec2{0.31, 0.42}, Vec2{0.63, 0.17}, Vec2{0.5, 0.5}, Vec2{0.12, 0.81}}) {
    PointValue pv = evaluate(sol, x, 1);
    Vec2 exact{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
               kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
    worst = std::max(worst, norm(pv.grad - exact));
  }
  CHECK(worst < 10.0 * h);
  CHECK_THROWS_WITH_AS(evaluate(sol, {5.0, 5.0}, 0), doctest::Contains("OutsideDomain"), Error);
}

TEST_CASE("solution text export") {
  Mesh mesh = unit_square_mesh(0.4, 1);
  FemSolution sol = solve_dirichlet(mesh, 1, source_preset("one", {0, 0}, 1.0));
  std::string txt = solution_to_text(sol);
  CHECK(std::count(txt.begin(), txt.end(), '\n') == mesh.num_vertices);
}

TEST_CASE("solve_dirichlet: boundary coefficients are exactly zero") {
  Polygon sq = polygon_preset("square");
  RoundedDomain dom = construct_rounded_domain(sq, {0.25, 0.03, 1});
  WeightFunction w = make_weight(dom);
  SizingField sizing;
  sizing.h_max = 0.15;
  sizing.h_min = 1e-4;
  sizing.beta = 0.5;
  sizing.weight = &w;
  Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
  FemSolution sol = solve_dirichlet(mesh, 2, source_preset("one", {0, 0}, 1.0), &w);
  int boundary_nodes = 0;
  for (size_t i = 0; i < mesh.node_marker.size(); ++i)
    if (mesh.node_marker[i] >= 0) {
      CHECK(sol.coeffs[i] == 0.0);
      ++boundary_nodes;
    }
  CHECK(boundary_nodes > 0);
}
