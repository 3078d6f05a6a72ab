#include "roundfem/norms.hpp"

#include <cmath>
#include <random>

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

ScalarField constant_field(double v) {
  return [v](Vec2) {
    FieldSample fs;
    fs.u = v;
    return fs;
  };
}

}  // namespace

TEST_CASE("kondratiev_norm: constant field with constant weight") {
  Mesh mesh = unit_square_mesh(0.2, 1);
  WeightFunction w(EtaProfile(1.0), {});  // r = 1/6 everywhere

  CHECK(kondratiev_norm(mesh, constant_field(1.0), w, 0, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(kondratiev_norm(mesh, constant_field(1.0), w, 1, 1.0) ==
        doctest::Approx(6.0).epsilon(1e-10));
  // with r < 1 the norm grows with a
  CHECK(kondratiev_norm(mesh, constant_field(1.0), w, 0, 1.0) >
        kondratiev_norm(mesh, constant_field(1.0), w, 0, 0.0));
}

TEST_CASE("sobolev_norm: classical values") {
  Mesh mesh = unit_square_mesh(0.05, 2);
  CHECK(sobolev_norm(mesh, constant_field(1.0), 0) == doctest::Approx(1.0).epsilon(1e-10));

  ScalarField sine = [](Vec2 x) {
    FieldSample fs;
    fs.u = std::sin(kPi * x.x) * std::sin(kPi * x.y);
    fs.grad = {kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
               kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
    return fs;
  };
  CHECK(sobolev_norm(mesh, sine, 0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("contraction: H^1 <= K^1_1 and H^2 <= K^2_2 on random fields") {
  Polygon sq = polygon_preset("square");
  RoundedDomain dom = construct_rounded_domain(sq, {sq.R0 / 8.0, sq.R0 / 64.0, 2});
  WeightFunction w = make_weight(dom);
  SizingField sizing;
  sizing.h_max = 0.15;
  sizing.h_min = 1e-4;
  sizing.beta = 0.5;
  sizing.weight = &w;
  Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);

  for (unsigned long seed = 0; seed < 100; ++seed) {
    FemSolution u = random_fem_field(mesh, 2, seed);
    double h1 = sobolev_norm(u, 1);
    double k11 = kondratiev_norm(u, w, 1, 1.0);
    CHECK(h1 <= k11 * (1.0 + 1e-12));
    if (seed < 20) {
      double h2 = sobolev_norm(u, 2);
      double k22 = kondratiev_norm(u, w, 2, 2.0);
      CHECK(h2 <= k22 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("K = H identification in the exact cone zone (m <= 1)") {
  // a mesh fully inside {dist <= R/8} of a single puncture at the origin
  Polygon box = polygon_validate({{0.02, 0.02}, {0.08, 0.02}, {0.08, 0.08}, {0.02, 0.08}});
  Mesh mesh = triangulate(polygon_boundary(box, uniform_sizing(0.01)), uniform_sizing(0.01));
  WeightFunction w(EtaProfile(1.0), {Vec2{0, 0}});

  ScalarField field = [](Vec2 x) {
    FieldSample fs;
    fs.u = std::sin(9.0 * x.x) * std::exp(x.y);
    fs.grad = {9.0 * std::cos(9.0 * x.x) * std::exp(x.y), std::sin(9.0 * x.x) * std::exp(x.y)};
    return fs;
  };
  double k11 = kondratiev_norm(mesh, field, w, 1, 1.0);

  // volume form r^{-2} dx, gradient norm r^2 |grad u|^2
  double l2_g = integrate(mesh, [&](Vec2 x) {
    double rr = w.r(x);
    FieldSample fs = field(x);
    return fs.u * fs.u / (rr * rr);
  });
  double h1_g = integrate(mesh, [&](Vec2 x) {
    double rr = w.r(x);
    FieldSample fs = field(x);
    return (rr * rr * norm2(fs.grad)) / (rr * rr);
  });
  CHECK(k11 == doctest::Approx(std::sqrt(l2_g + h1_g)).epsilon(1e-8));
}

TEST_CASE("shift isomorphism: empirical ratios within the Leibniz bound") {
  Polygon sq = polygon_preset("square");
  RoundedDomain dom = construct_rounded_domain(sq, {sq.R0 / 8.0, sq.R0 / 64.0, 1});
  WeightFunction w = make_weight(dom);
  SizingField sizing;
  sizing.h_max = 0.15;
  sizing.h_min = 1e-4;
  sizing.beta = 0.5;
  sizing.weight = &w;
  Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);

  for (double b : {0.25, -0.25, 0.5, -0.5}) {
    double cb = shift_bound(w.eta(), b);
    double cmb = shift_bound(w.eta(), -b);
    for (unsigned long seed = 0; seed < 20; ++seed) {
      FemSolution u = random_fem_field(mesh, 2, seed);
      double base = kondratiev_norm(u, w, 2, 1.0);
      double shifted = kondratiev_norm_shifted(u, w, 2, 1.0 + b, b);
      double ratio = shifted / base;
      CHECK(ratio <= cb * (1.0 + 1e-9));
      CHECK(ratio >= 1.0 / cmb * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("gagliardo_seminorm: vanishing cases") {
  Mesh mesh = unit_square_mesh(0.35, 1);
  CHECK(gagliardo_seminorm(mesh, [](Vec2) { return Vec2{0.7, -0.3}; }, 0.5) == 0.0);
  // gradient of a globally linear function is constant
  CHECK(gagliardo_seminorm(mesh, [](Vec2) { return Vec2{2.0, 1.0}; }, 0.3) == 0.0);
}

TEST_CASE("gagliardo_seminorm: cross-check against Monte Carlo") {
  Mesh mesh = unit_square_mesh(0.35, 1);
  auto field = [](Vec2 x) { return Vec2{2.0 * x.x, 0.0}; };
  double quad = gagliardo_seminorm(mesh, field, 0.5);

  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double acc = 0.0;
  const long pairs = 10000000;
  for (long k = 0; k < pairs; ++k) {
    Vec2 x{uni(rng), uni(rng)}, y{uni(rng), uni(rng)};
    double d2 = norm2(x - y);
    if (d2 == 0.0) continue;
    double diff = 2.0 * (x.x - y.x);
    acc += diff * diff / std::pow(d2, 1.5);
  }
  double mc = std::sqrt(acc / pairs);
  CHECK(quad > 0.0);
  CHECK(std::abs(quad - mc) <= 0.02 * mc);
}

TEST_CASE("gagliardo_seminorm: element cap") {
  Mesh mesh = unit_square_mesh(0.02, 1);
  CHECK_THROWS_WITH_AS(gagliardo_seminorm(mesh, [](Vec2) { return Vec2{}; }, 0.5),
                       doctest::Contains("TooManyElements"), Error);
}

TEST_CASE("ratio_report: zero source leaves the ratio undefined") {
  Polygon sq = polygon_preset("square");
  RoundedDomain dom = construct_rounded_domain(sq, {0.25, 0.03, 1});
  WeightFunction w = make_weight(dom);
  SizingField sizing;
  sizing.h_max = 0.2;
  sizing.h_min = 1e-4;
  sizing.beta = 0.5;
  sizing.weight = &w;
  Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
  FemSolution sol = solve_dirichlet(mesh, 2, source_preset("zero", {0, 0}, 1.0), &w);
  NormReport r = ratio_report(dom, mesh, sol, source_preset("zero", {0, 0}, 1.0), w, 0.3);
  CHECK(!r.ratio_defined);
  CHECK(std::isnan(r.ratio));
  std::string row = norm_report_csv_row(r);
  CHECK(row.find("nan") != std::string::npos);
}

TEST_CASE("ratio_report: scaling invariance and mesh stability") {
  Polygon sq = polygon_preset("square");
  RoundedDomain dom = construct_rounded_domain(sq, {0.25, 0.03, 1});
  WeightFunction w = make_weight(dom);

  auto run = [&](double h) {
    SizingField sizing;
    sizing.h_max = h;
    sizing.h_min = 1e-4;
    sizing.beta = 0.5;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
    auto f = source_preset("sine", {0, 0}, 1.0);
    FemSolution sol = solve_dirichlet(mesh, 2, f, &w);
    NormReport rep = ratio_report(dom, mesh, sol, f, w, 0.3);

    // scaling f -> 10 f scales both norms, the ratio stays put
    auto f10 = [&](Vec2 x) { return 10.0 * f(x); };
    FemSolution sol10 = solve_dirichlet(mesh, 2, f10, &w);
    NormReport rep10 = ratio_report(dom, mesh, sol10, f10, w, 0.3);
    CHECK(rep10.ratio == doctest::Approx(rep.ratio).epsilon(1e-10));
    return rep.ratio;
  };
  double r1 = run(0.08);
  double r2 = run(0.04);
  CHECK(std::abs(r1 - r2) <= 0.02 * std::max(r1, r2));
}

TEST_CASE("norm report csv") {
  NormReport r;
  r.n = 4;
  r.a = 0.3;
  r.h = 0.05;
  r.dofs = 1234;
  r.l2_f = 2.0;
  r.k21a = 6.0;
  r.h1 = 1.5;
  r.ratio = 3.0;
  r.ratio_defined = true;
  CHECK(norm_report_csv_header() == "n,a,m,h,dofs,l2_f,k21a,h1,ratio,gagliardo");
  CHECK(norm_report_csv_row(r).rfind("4,0.3,2,0.05,1234,2,6,1.5,3,", 0) == 0);
}
