#pragma once

#include <functional>
#include <optional>
#include <string>

#include "roundfem/fem.hpp"
#include "roundfem/mesh.hpp"
#include "roundfem/weights.hpp"

namespace roundfem {

/// Value and derivatives of a scalar field at a point (hess = xx, xy, yy).
struct FieldSample {
  double u = 0.0;
  Vec2 grad{};
  std::array<double, 3> hess{};
};
using ScalarField = std::function<FieldSample(Vec2)>;

/// Mesh quadrature of a pointwise integrand.
double integrate(const Mesh& mesh, const std::function<double(Vec2)>& f, int degree = 6);

/// Weighted Sobolev norm with weight r^{|alpha| - a} on order-|alpha|
/// derivatives, m <= 2. The m = 2 terms need order-2 elements.
double kondratiev_norm(const FemSolution& sol, const WeightFunction& w, int m, double a);
double kondratiev_norm(const Mesh& mesh, const ScalarField& field, const WeightFunction& w, int m,
                       double a);

/// Same norm of the multiplied field r^b u, evaluated in closed form from
/// the element basis and the weight derivatives.
double kondratiev_norm_shifted(const FemSolution& sol, const WeightFunction& w, int m, double a,
                               double b);

double sobolev_norm(const FemSolution& sol, int m);
double sobolev_norm(const Mesh& mesh, const ScalarField& field, int m);

/// Gagliardo double integral of a vector field over element pairs,
/// s in (0.05, 0.95); near pairs handled by recursive splitting. Quadratic
/// cost, rejected beyond 2000 elements.
double gagliardo_seminorm(const Mesh& mesh, const std::function<Vec2(Vec2)>& field, double s);

struct NormReport {
  int n = 0;
  double a = 0.0;
  int m = 2;
  double h = 0.0;
  int dofs = 0;
  double l2_f = 0.0;
  double k21a = 0.0;
  double h1 = 0.0;
  double ratio = 0.0;
  bool ratio_defined = false;
  std::optional<double> gagliardo;
};

/// Fills the report for one solve: ratio = ||u||_{K^2_{1+a}} / ||f||_{L2}.
NormReport ratio_report(const RoundedDomain& dom, const Mesh& mesh, const FemSolution& sol,
                        const std::function<double(Vec2)>& f, const WeightFunction& w, double a);

std::string norm_report_csv_header();
std::string norm_report_csv_row(const NormReport& r);

/// Seeded Gaussian coefficient vector on the FEM space.
FemSolution random_fem_field(const Mesh& mesh, int order, unsigned long seed);

/// Leibniz bound for the norm of multiplication by r^b on K^2_a, computed
/// from the single-puncture admissibility suprema.
double shift_bound(const EtaProfile& eta, double b);

}  // namespace roundfem
