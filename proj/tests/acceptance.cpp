// Acceptance suite: one pass/fail line per criterion, exit code 0 only when
// every criterion holds at its stated tolerance.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "roundfem/diagnostics.hpp"
#include "roundfem/fem.hpp"
#include "roundfem/harness.hpp"
#include "roundfem/norms.hpp"

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

double ratio_max_min(const std::vector<double>& v) {
  double lo = v[0], hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------

bool criterion1(std::string& detail) {
  auto exact = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  auto f = source_preset("sine", {0, 0}, 1.0);

  std::vector<double> hs = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
  std::vector<double> errs;
  for (double h : hs) {
    Mesh mesh = unit_square_mesh(h, 1);
    errs.push_back(l2_error(solve_dirichlet(mesh, 1, f), exact));
  }
  double p1_slope = fit_slope(hs, errs);

  std::vector<double> hs2 = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0};
  std::vector<double> errs2;
  for (double h : hs2) {
    Mesh mesh = unit_square_mesh(h, 2);
    errs2.push_back(l2_error(solve_dirichlet(mesh, 2, f), exact));
  }
  double p2_slope = fit_slope(hs2, errs2);

  detail = fmt("P1 slope %.3f (need 2.0 +- 0.15), P2 slope %.3f (need >= 2.7)", p1_slope, p2_slope);
  return std::abs(p1_slope - 2.0) <= 0.15 && p2_slope >= 2.7;
}

bool criterion2(std::string& detail) {
  WeightFunction w(EtaProfile(6.0), {});  // r identically 1
  Mesh mesh = unit_square_mesh(1.0 / 32.0, 2);
  double lambda = weighted_eigen_min(mesh, 2, w);
  double target = 2.0 * kPi * kPi;
  detail = fmt("lambda_min %.6f vs 2 pi^2 = %.6f (rel err %.2e, need <= 1%%)", lambda, target,
               std::abs(lambda - target) / target);
  return std::abs(lambda - target) <= 0.01 * target;
}

bool criterion3(std::string& detail) {
  WeightFunction w(EtaProfile(1.0), {Vec2{0, 0}});
  double len_circle = geodesic_length(circle_curve({0, 0}, 0.1), w);
  double err_circle = std::abs(len_circle - 2.0 * kPi) / (2.0 * kPi);

  double a = 0.02, b = 0.1;
  double len_radial = geodesic_length(segment_curve({a, 0}, {b, 0}), w);
  double err_radial = std::abs(len_radial - std::log(b / a)) / std::log(b / a);

  double worst_kappa = 0.0;
  for (int i = 0; i < 32; ++i) {
    double phi = 2.0 * kPi * i / 32;
    Vec2 x{0.1 * std::cos(phi), 0.1 * std::sin(phi)};
    worst_kappa = std::max(worst_kappa, std::abs(conformal_curvature(x, -10.0, normalized(x), w)));
  }
  detail = fmt(
      "circle len rel err %.2e (<= 1e-3), radial rel err %.2e (<= 1e-3), |kappa| %.2e (<= 1e-6)",
      err_circle, err_radial, worst_kappa);
  return err_circle <= 1e-3 && err_radial <= 1e-3 && worst_kappa <= 1e-6;
}

bool criterion4(std::string& detail) {
  Polygon sq = polygon_preset("square");
  double rho = sq.R0 / 8.0, rp = sq.R0 / 64.0;

  // exact cone-zone isometry: curvature suprema on the corner arcs
  double sup_ref = -1.0, worst_gap = 0.0;
  for (int n : {1, 2, 4, 8}) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    double sup = curvature_profile_arcs(dom, w, 0).sup_abs;
    if (sup_ref < 0.0) sup_ref = sup;
    worst_gap = std::max(worst_gap, std::abs(sup - sup_ref));
  }

  // mesh-based distances to the boundary inside matching radius bands
  auto band_depth = [&](int n) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = 0.01;
    sizing.h_min = 1e-6;
    sizing.beta = 0.03;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing);
    std::vector<int> sources;
    for (int i = 0; i < mesh.num_vertices; ++i)
      if (mesh.node_marker[i] >= 0) sources.push_back(i);
    auto d = mesh_geodesic_distances(mesh, w, sources);
    double lo = 0.02 / n, hi = 0.069 / n;
    double depth = 0.0;
    for (int i = 0; i < mesh.num_vertices; ++i) {
      if (!std::isfinite(d[i])) continue;
      for (Vec2 p : dom.punctures) {
        double rad = dist(mesh.nodes[i], p);
        if (rad >= lo && rad <= hi) depth = std::max(depth, d[i]);
      }
    }
    return depth;
  };
  double d1 = band_depth(1);
  double d2 = band_depth(2);
  double rel = std::abs(d1 - d2) / std::max(d1, d2);

  detail = fmt("arc sup |kappa| spread %.2e (<= 1e-8), band depths %.4f vs %.4f rel %.3f (<= 0.02)",
               worst_gap, d1, d2, rel);
  return worst_gap <= 1e-8 && rel <= 0.02;
}

bool criterion5(std::string& detail) {
  Polygon L = polygon_preset("lshape");
  double rho = L.R0 / 8.0, rp = L.R0 / 64.0;
  std::ostringstream os;
  bool ok = true;
  for (int k = 0; k <= 2; ++k) {
    std::vector<double> sups;
    for (int n : {1, 2, 4, 8, 16}) {
      RoundedDomain dom = construct_rounded_domain(L, {rho, rp, n});
      WeightFunction w = make_weight(dom);
      sups.push_back(curvature_profile(dom, w, k, 0.02).sup_abs);
    }
    double ratio = ratio_max_min(sups);
    os << "k=" << k << " ratio " << fmt("%.3f", ratio) << "  ";
    ok = ok && ratio < 2.0;
  }
  detail = os.str() + "(need < 2)";
  return ok;
}

bool criterion6(std::string& detail) {
  Polygon sq = polygon_preset("square");
  double rho = sq.R0 / 8.0, rp = sq.R0 / 64.0;
  std::vector<double> widths;
  double worst_corner = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = 0.03;
    sizing.h_min = 1e-6;
    sizing.beta = 0.3;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing);
    widths.push_back(finite_width_estimate(dom, w, mesh));
    worst_corner = std::max(worst_corner, corner_ball_max_width(dom, w, mesh));
  }
  double ratio = ratio_max_min(widths);
  bool finite = true;
  for (double wv : widths) finite = finite && std::isfinite(wv) && wv > 0.0;
  detail = fmt("width ratio %.3f (<= 2), corner-ball max %.4f (<= %.4f)", ratio, worst_corner,
               2.0 * kPi + 0.1);
  return finite && ratio <= 2.0 && worst_corner <= 2.0 * kPi + 0.1;
}

bool criterion7(std::string& detail) {
  Polygon sq = polygon_preset("square");
  double rho = sq.R0 / 8.0, rp = sq.R0 / 64.0;
  std::vector<double> lambdas;
  for (int n : {1, 2, 4, 8, 16}) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = 0.08;
    sizing.h_min = 1e-5;
    sizing.beta = 0.35;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
    lambdas.push_back(weighted_eigen_min(mesh, 2, w));
  }
  double ratio = ratio_max_min(lambdas);
  std::ostringstream os;
  os << "lambda_min:";
  for (double l : lambdas) os << " " << fmt("%.4f", l);
  detail = os.str() + fmt("  ratio %.3f (<= 2)", ratio);
  return ratio <= 2.0;
}

bool criterion8(std::string& detail) {
  Polygon L = polygon_preset("lshape");
  double rho = L.R0 / 8.0, rp = L.R0 / 64.0;
  auto f = source_preset("sine", {0, 0}, 1.0);

  auto ratios_at = [&](double beta, double h_max, double h_min, double a) {
    std::vector<double> out;
    for (int n : {1, 2, 4, 8, 16}) {
      RoundedDomain dom = construct_rounded_domain(L, {rho, rp, n});
      WeightFunction w = make_weight(dom);
      SizingField sizing;
      sizing.h_max = h_max;
      sizing.h_min = h_min;
      sizing.beta = beta;
      sizing.weight = &w;
      Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
      FemSolution sol = solve_dirichlet(mesh, 2, f, &w);
      out.push_back(ratio_report(dom, mesh, sol, f, w, a).ratio);
    }
    return out;
  };

  std::vector<double> base = ratios_at(0.4, 0.1, 2e-4, 0.3);
  std::vector<double> fine = ratios_at(0.2, 0.05, 1e-4, 0.3);
  double worst_change = 0.0;
  for (size_t i = 0; i < base.size(); ++i)
    worst_change = std::max(worst_change, std::abs(base[i] - fine[i]) / fine[i]);
  double ratio = ratio_max_min(fine);

  // sharpness probe (informative, non-binding)
  std::vector<double> probe = ratios_at(0.4, 0.1, 2e-4, 0.9);
  std::ostringstream os;
  os << fmt("ratio spread %.3f (<= 3), refinement drift %.3f (< 0.05); ", ratio, worst_change);
  os << "a=0.9 probe:";
  for (double r : probe) os << " " << fmt("%.3f", r);
  detail = os.str();
  return ratio <= 3.0 && worst_change < 0.05;
}

bool criterion9(std::string& detail) {
  Polygon sq = polygon_preset("square");
  double rho = sq.R0 / 8.0, rp = sq.R0 / 64.0;
  int violations = 0, total = 0;
  for (int n : {1, 2, 4}) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = 0.15;
    sizing.h_min = 1e-4;
    sizing.beta = 0.5;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
    for (unsigned long seed = 0; seed < 100; ++seed) {
      FemSolution u = random_fem_field(mesh, 2, 1000 * n + seed);
      double h1 = sobolev_norm(u, 1);
      double k11 = kondratiev_norm(u, w, 1, 1.0);
      double h2 = sobolev_norm(u, 2);
      double k22 = kondratiev_norm(u, w, 2, 2.0);
      total += 2;
      if (h1 > k11 * (1.0 + 1e-12)) ++violations;
      if (h2 > k22 * (1.0 + 1e-12)) ++violations;
    }
  }
  detail = fmt("%d violations out of %d inequalities (need 0)", violations, total);
  return violations == 0;
}

bool criterion10(std::string& detail) {
  Polygon sq = polygon_preset("square");
  double rho = sq.R0 / 8.0, rp = sq.R0 / 64.0;
  EtaProfile eta(sq.R);
  double c_plus = shift_bound(eta, 0.25);
  double c_minus = shift_bound(eta, -0.25);

  bool ok = true;
  double worst_margin = 1e300;
  for (int n : {1, 2, 4}) {
    RoundedDomain dom = construct_rounded_domain(sq, {rho, rp, n});
    WeightFunction w = make_weight(dom);
    SizingField sizing;
    sizing.h_max = 0.15;
    sizing.h_min = 1e-4;
    sizing.beta = 0.5;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing, 2);
    for (unsigned long seed = 0; seed < 20; ++seed) {
      FemSolution u = random_fem_field(mesh, 2, 2000 * n + seed);
      double base = kondratiev_norm(u, w, 2, 1.0);
      double up = kondratiev_norm_shifted(u, w, 2, 1.25, 0.25);
      double dn = kondratiev_norm_shifted(u, w, 2, 0.75, -0.25);
      double r_up = up / base, r_dn = dn / base;
      ok = ok && r_up <= c_plus && r_up >= 1.0 / c_minus;
      ok = ok && r_dn <= c_minus && r_dn >= 1.0 / c_plus;
      double prod = r_up * r_dn;
      double square = c_plus * c_minus;
      ok = ok && prod <= square && prod >= 1.0 / square;
      worst_margin = std::min({worst_margin, c_plus / r_up, r_up * c_minus});
    }
  }
  detail = fmt("bounds C*(+)=%.3f C*(-)=%.3f, min margin factor %.3f (need all inside)", c_plus,
               c_minus, worst_margin);
  return ok;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Entry entries[] = {
      {"1 manufactured-solution convergence", criterion1},
      {"2 classical eigenvalue", criterion2},
      {"3 metric identities", criterion3},
      {"4 homothety isometry", criterion4},
      {"5 bounded-geometry uniformity", criterion5},
      {"6 finite width", criterion6},
      {"7 uniform Poincare", criterion7},
      {"8 main uniform estimate", criterion8},
      {"9 contraction inequalities", criterion9},
      {"10 shift-isomorphism stability", criterion10},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", e.name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
