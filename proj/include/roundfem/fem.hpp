#pragma once

#include <array>
#include <functional>
#include <vector>

#include "roundfem/core.hpp"
#include "roundfem/mesh.hpp"
#include "roundfem/weights.hpp"

namespace roundfem {

/// Symmetric sparse matrix in CSR form.
struct SparseOperator {
  int n = 0;
  std::vector<int> row_offsets;
  std::vector<int> cols;
  std::vector<double> vals;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double quadratic(const std::vector<double>& x, const std::vector<double>& y) const;
  double symmetry_defect() const;  // max |a_ij - a_ji| / max |a_ij|
};

/// Triangle Gauss rule; weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};
const QuadratureRule& triangle_rule(int degree);  // degree 4 or 6

/// Basis data at one barycentric point of one element. Positions and first
/// derivatives follow the (possibly curved) isoparametric map; Hessians use
/// the affine vertex map, so they are elementwise constant.
struct BasisEval {
  Vec2 x;
  double weight = 0.0;  // quadrature weight times |det J|
  int n_basis = 3;
  std::array<double, 6> N{};
  std::array<Vec2, 6> dN{};
  std::array<std::array<double, 3>, 6> d2N{};  // xx, xy, yy
};

/// Evaluates basis functions of element t at a barycentric point.
BasisEval element_basis(const Mesh& mesh, int t, const std::array<double, 3>& bary,
                        double quad_weight, bool with_hessian = false);

int element_dof(const Mesh& mesh, int t, int local);
int num_dofs(const Mesh& mesh);

struct PoissonOperators {
  SparseOperator stiffness;
  SparseOperator mass;
  SparseOperator weighted_mass;  // density r^{-2}; equals mass/r^2 pointwise
  std::vector<char> dirichlet;   // per dof
  int dofs = 0;
};

/// Gauss quadrature of degree 4 everywhere, degree 6 within R/5 of a
/// puncture.
PoissonOperators assemble_poisson(const Mesh& mesh, int order,
                                  const WeightFunction* w = nullptr);

struct FemSolution {
  const Mesh* mesh = nullptr;
  int order = 1;
  std::vector<double> coeffs;  // zero at Dirichlet nodes

  double operator()(Vec2 x) const;
};

/// Solves the Poisson problem (Laplacian u = f, zero boundary values) with
/// conjugate gradients on the positive form; relative residual 1e-10.
FemSolution solve_dirichlet(const Mesh& mesh, int order, const std::function<double(Vec2)>& f,
                            const WeightFunction* w = nullptr);

/// Conjugate gradients with Jacobi preconditioning on the free dofs.
std::vector<double> cg_solve(const SparseOperator& A, const std::vector<double>& rhs,
                             const std::vector<char>& dirichlet, double rel_tol, int max_iter);

/// Smallest eigenvalue of K u = lambda M_w u by inverse power iteration;
/// relative eigenvalue tolerance 1e-6.
double weighted_eigen_min(const Mesh& mesh, int order, const WeightFunction& w);

struct PointValue {
  double u = 0.0;
  Vec2 grad{};
  std::array<double, 3> hess{};  // xx, xy, yy
};

/// Point evaluation by walking point location; derivative order 0, 1 or 2.
PointValue evaluate(const FemSolution& sol, Vec2 x, int deriv_order);

/// Source presets: "one", "sine" (manufactured companion of
/// u = sin(pi x) sin(pi y)), "bump", "rbump" (seeded Gaussian mix), "zero".
std::function<double(Vec2)> source_preset(const std::string& name, Vec2 center, double scale,
                                          unsigned long seed = 0);

/// "x y u" per vertex node.
std::string solution_to_text(const FemSolution& sol);

}  // namespace roundfem
