#include "roundfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

namespace roundfem {

// ---------------------------------------------------------------------------
// SparseOperator

void SparseOperator::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

double SparseOperator::quadratic(const std::vector<double>& x, const std::vector<double>& y) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) s += x[i] * vals[k] * y[cols[k]];
  return s;
}

double SparseOperator::symmetry_defect() const {
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      int j = cols[k];
      scale = std::max(scale, std::abs(vals[k]));
      double aji = 0.0;
      for (int l = row_offsets[j]; l < row_offsets[j + 1]; ++l)
        if (cols[l] == i) aji = vals[l];
      worst = std::max(worst, std::abs(vals[k] - aji));
    }
  return scale > 0.0 ? worst / scale : 0.0;
}

// ---------------------------------------------------------------------------
// Quadrature (Dunavant rules; weights sum to 1/2)

const QuadratureRule& triangle_rule(int degree) {
  static QuadratureRule deg4 = [] {
    QuadratureRule r;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (double a : {a1, a2}) {
      double w = (a == a1) ? w1 : w2;
      r.bary.push_back({1.0 - 2.0 * a, a, a});
      r.bary.push_back({a, 1.0 - 2.0 * a, a});
      r.bary.push_back({a, a, 1.0 - 2.0 * a});
      r.weights.insert(r.weights.end(), 3, 0.5 * w);
    }
    return r;
  }();
  static QuadratureRule deg6 = [] {
    QuadratureRule r;
    const double a1 = 0.063089014491502, w1 = 0.050844906370207;
    const double a2 = 0.249286745170910, w2 = 0.116786275726379;
    const double b1 = 0.310352451033785, b2 = 0.053145049844816, w3 = 0.082851075618374;
    for (double a : {a1, a2}) {
      double w = (a == a1) ? w1 : w2;
      r.bary.push_back({1.0 - 2.0 * a, a, a});
      r.bary.push_back({a, 1.0 - 2.0 * a, a});
      r.bary.push_back({a, a, 1.0 - 2.0 * a});
      r.weights.insert(r.weights.end(), 3, 0.5 * w);
    }
    double c = 1.0 - b1 - b2;
    const double perms[6][3] = {{b1, b2, c}, {b2, b1, c}, {b1, c, b2},
                                {b2, c, b1}, {c, b1, b2}, {c, b2, b1}};
    for (auto& p : perms) {
      r.bary.push_back({p[0], p[1], p[2]});
      r.weights.push_back(0.5 * w3);
    }
    return r;
  }();
  return degree <= 4 ? deg4 : deg6;
}

// ---------------------------------------------------------------------------
// Basis evaluation

namespace {

// reference gradients of barycentric coordinates in (xi, eta)
constexpr double kDL[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

void p2_shape(const std::array<double, 3>& L, double* N, double dN[6][2]) {
  for (int i = 0; i < 3; ++i) {
    N[i] = L[i] * (2.0 * L[i] - 1.0);
    dN[i][0] = (4.0 * L[i] - 1.0) * kDL[i][0];
    dN[i][1] = (4.0 * L[i] - 1.0) * kDL[i][1];
  }
  const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
  for (int e = 0; e < 3; ++e) {
    int a = ea[e], b = eb[e];
    N[3 + e] = 4.0 * L[a] * L[b];
    dN[3 + e][0] = 4.0 * (L[b] * kDL[a][0] + L[a] * kDL[b][0]);
    dN[3 + e][1] = 4.0 * (L[b] * kDL[a][1] + L[a] * kDL[b][1]);
  }
}

struct Mat2 {
  double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]
  double det() const { return a * d - b * c; }
  Mat2 inverse() const {
    double dd = det();
    return {d / dd, -b / dd, -c / dd, a / dd};
  }
};

}  // namespace

int element_dof(const Mesh& mesh, int t, int local) {
  if (mesh.order == 2) return mesh.tri_nodes[t][local];
  return mesh.triangles[t][local];
}

int num_dofs(const Mesh& mesh) { return static_cast<int>(mesh.nodes.size()); }

BasisEval element_basis(const Mesh& mesh, int t, const std::array<double, 3>& bary,
                        double quad_weight, bool with_hessian) {
  BasisEval out;
  const auto& tri = mesh.triangles[t];
  Vec2 v0 = mesh.nodes[tri[0]], v1 = mesh.nodes[tri[1]], v2 = mesh.nodes[tri[2]];
  Mat2 J0{v1.x - v0.x, v2.x - v0.x, v1.y - v0.y, v2.y - v0.y};  // affine vertex map

  if (mesh.order == 1) {
    out.n_basis = 3;
    double det = J0.det();
    if (det <= 0.0) fail("SingularElement", "nonpositive Jacobian");
    Mat2 Ji = J0.inverse();
    for (int i = 0; i < 3; ++i) {
      out.N[i] = bary[i];
      out.dN[i] = {Ji.a * kDL[i][0] + Ji.c * kDL[i][1], Ji.b * kDL[i][0] + Ji.d * kDL[i][1]};
      out.d2N[i] = {0.0, 0.0, 0.0};
    }
    out.x = bary[0] * v0 + bary[1] * v1 + bary[2] * v2;
    out.weight = quad_weight * det;
    return out;
  }

  out.n_basis = 6;
  double N[6], dN[6][2];
  p2_shape(bary, N, dN);
  const auto& tn = mesh.tri_nodes[t];
  Vec2 xs{0, 0};
  Mat2 J{0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    Vec2 xi = mesh.nodes[tn[i]];
    xs += N[i] * xi;
    J.a += xi.x * dN[i][0];
    J.b += xi.x * dN[i][1];
    J.c += xi.y * dN[i][0];
    J.d += xi.y * dN[i][1];
  }
  double det = J.det();
  if (det <= 0.0) fail("SingularElement", "nonpositive isoparametric Jacobian");
  Mat2 Ji = J.inverse();
  out.x = xs;
  out.weight = quad_weight * det;
  for (int i = 0; i < 6; ++i) {
    out.N[i] = N[i];
    out.dN[i] = {Ji.a * dN[i][0] + Ji.c * dN[i][1], Ji.b * dN[i][0] + Ji.d * dN[i][1]};
  }
  if (with_hessian) {
    // affine part only; constant per element
    double det0 = J0.det();
    if (det0 <= 0.0) fail("SingularElement", "nonpositive vertex Jacobian");
    Mat2 A = J0.inverse();
    for (int i = 0; i < 6; ++i) {
      double H[2][2] = {{0, 0}, {0, 0}};
      auto acc = [&](const double* ga, const double* gb, double s) {
        for (int r = 0; r < 2; ++r)
          for (int col = 0; col < 2; ++col) H[r][col] += s * (ga[r] * gb[col] + gb[r] * ga[col]);
      };
      if (i < 3) {
        acc(kDL[i], kDL[i], 2.0);
      } else {
        const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
        acc(kDL[ea[i - 3]], kDL[eb[i - 3]], 4.0);
      }
      // ref = A (x - v0), so H_phys = A^T H_ref A
      double a11 = A.a, a12 = A.b, a21 = A.c, a22 = A.d;
      double Hxx = a11 * (H[0][0] * a11 + H[0][1] * a21) + a21 * (H[1][0] * a11 + H[1][1] * a21);
      double Hxy = a11 * (H[0][0] * a12 + H[0][1] * a22) + a21 * (H[1][0] * a12 + H[1][1] * a22);
      double Hyy = a12 * (H[0][0] * a12 + H[0][1] * a22) + a22 * (H[1][0] * a12 + H[1][1] * a22);
      out.d2N[i] = {Hxx, Hxy, Hyy};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

SparseOperator build_pattern(const Mesh& mesh) {
  int n = num_dofs(mesh);
  int per_elem = mesh.order == 2 ? 6 : 3;
  std::vector<std::vector<int>> adj(n);
  for (size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int i = 0; i < per_elem; ++i)
      for (int j = 0; j < per_elem; ++j)
        adj[element_dof(mesh, static_cast<int>(t), i)].push_back(
            element_dof(mesh, static_cast<int>(t), j));
  SparseOperator A;
  A.n = n;
  A.row_offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& v = adj[i];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    A.row_offsets[i + 1] = A.row_offsets[i] + static_cast<int>(v.size());
  }
  A.cols.reserve(A.row_offsets[n]);
  for (int i = 0; i < n; ++i) A.cols.insert(A.cols.end(), adj[i].begin(), adj[i].end());
  A.vals.assign(A.cols.size(), 0.0);
  return A;
}

void add_entry(SparseOperator& A, int i, int j, double v) {
  int lo = A.row_offsets[i], hi = A.row_offsets[i + 1];
  auto it = std::lower_bound(A.cols.begin() + lo, A.cols.begin() + hi, j);
  A.vals[it - A.cols.begin()] += v;
}

}  // namespace

PoissonOperators assemble_poisson(const Mesh& mesh, int order, const WeightFunction* w) {
  if (order != mesh.order)
    fail("SingularElement", "mesh order does not match requested element order");
  PoissonOperators ops;
  ops.dofs = num_dofs(mesh);
  ops.stiffness = build_pattern(mesh);
  ops.mass = build_pattern(mesh);
  ops.weighted_mass = build_pattern(mesh);
  int per_elem = order == 2 ? 6 : 3;

  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    int degree = 4;
    if (w) {
      const auto& tri = mesh.triangles[t];
      Vec2 centroid = (mesh.nodes[tri[0]] + mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) / 3.0;
      if (w->puncture_distance(centroid) < w->eta().R() / 5.0) degree = 6;
    }
    const QuadratureRule& rule = triangle_rule(degree);
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be = element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q]);
      double density = 1.0;
      if (w) {
        double rr = w->r(be.x);
        density = 1.0 / (rr * rr);
      }
      for (int i = 0; i < per_elem; ++i) {
        int a = element_dof(mesh, static_cast<int>(t), i);
        for (int j = 0; j < per_elem; ++j) {
          int b = element_dof(mesh, static_cast<int>(t), j);
          add_entry(ops.stiffness, a, b, be.weight * dot(be.dN[i], be.dN[j]));
          double mij = be.weight * be.N[i] * be.N[j];
          add_entry(ops.mass, a, b, mij);
          add_entry(ops.weighted_mass, a, b, mij * density);
        }
      }
    }
  }

  ops.dirichlet.assign(ops.dofs, 0);
  for (size_t i = 0; i < mesh.node_marker.size(); ++i)
    if (mesh.node_marker[i] >= 0) ops.dirichlet[i] = 1;
  return ops;
}

// ---------------------------------------------------------------------------
// Conjugate gradients

std::vector<double> cg_solve(const SparseOperator& A, const std::vector<double>& rhs,
                             const std::vector<char>& dirichlet, double rel_tol, int max_iter) {
  int n = A.n;
  std::vector<double> x(n, 0.0), r(n), z(n), p(n), Ap(n);
  std::vector<double> diag(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      if (A.cols[k] == i && A.vals[k] != 0.0) diag[i] = A.vals[k];

  auto mask = [&](std::vector<double>& v) {
    for (int i = 0; i < n; ++i)
      if (dirichlet[i]) v[i] = 0.0;
  };

  r = rhs;
  mask(r);
  double rhs_norm = 0.0;
  for (double v : r) rhs_norm += v * v;
  rhs_norm = std::sqrt(rhs_norm);
  if (rhs_norm == 0.0) return x;

  for (int i = 0; i < n; ++i) z[i] = dirichlet[i] ? 0.0 : r[i] / diag[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  for (int it = 0; it < max_iter; ++it) {
    A.multiply(p, Ap);
    mask(Ap);
    double pAp = 0.0;
    for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    if (pAp <= 0.0) fail("CgDiverged", "operator not positive definite on the free space");
    double alpha = rz / pAp;
    double rnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
      rnorm += r[i] * r[i];
    }
    if (std::sqrt(rnorm) <= rel_tol * rhs_norm) return x;
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = dirichlet[i] ? 0.0 : r[i] / diag[i];
      rz_new += r[i] * z[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  fail("CgDiverged", "conjugate gradients hit the iteration cap");
}

FemSolution solve_dirichlet(const Mesh& mesh, int order, const std::function<double(Vec2)>& f,
                            const WeightFunction* w) {
  PoissonOperators ops = assemble_poisson(mesh, order, w);
  int n = ops.dofs;
  int per_elem = order == 2 ? 6 : 3;

  // weak form of (Laplacian u = f): K u = -F, F_i = int f phi_i
  std::vector<double> rhs(n, 0.0);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const QuadratureRule& rule = triangle_rule(4);
    for (size_t q = 0; q < rule.bary.size(); ++q) {
      BasisEval be = element_basis(mesh, static_cast<int>(t), rule.bary[q], rule.weights[q]);
      double fq = f(be.x);
      for (int i = 0; i < per_elem; ++i)
        rhs[element_dof(mesh, static_cast<int>(t), i)] -= be.weight * fq * be.N[i];
    }
  }

  int cap = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 50;
  FemSolution sol;
  sol.mesh = &mesh;
  sol.order = order;
  sol.coeffs = cg_solve(ops.stiffness, rhs, ops.dirichlet, 1e-10, cap);
  return sol;
}

double weighted_eigen_min(const Mesh& mesh, int order, const WeightFunction& w) {
  PoissonOperators ops = assemble_poisson(mesh, order, &w);
  int n = ops.dofs;
  int cap = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 50;

  std::vector<double> x(n);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  for (int i = 0; i < n; ++i) x[i] = ops.dirichlet[i] ? 0.0 : uni(rng);

  double lambda = 0.0;
  std::vector<double> Mx(n);
  for (int it = 0; it < 200; ++it) {
    ops.weighted_mass.multiply(x, Mx);
    for (int i = 0; i < n; ++i)
      if (ops.dirichlet[i]) Mx[i] = 0.0;
    std::vector<double> y = cg_solve(ops.stiffness, Mx, ops.dirichlet, 1e-12, cap);
    double num = ops.stiffness.quadratic(y, y);
    double den = ops.weighted_mass.quadratic(y, y);
    double lambda_new = num / den;
    double scale = 1.0 / std::sqrt(den);
    for (int i = 0; i < n; ++i) x[i] = y[i] * scale;
    if (it > 0 && std::abs(lambda_new - lambda) <= 1e-6 * std::abs(lambda_new)) return lambda_new;
    lambda = lambda_new;
  }
  fail("IterationStalled", "inverse power iteration did not settle");
}

// ---------------------------------------------------------------------------
// Point evaluation

namespace {

std::array<double, 3> barycentric(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  double det = cross(b - a, c - a);
  double l2 = cross(p - a, c - a) / det;
  double l3 = cross(b - a, p - a) / det;
  return {1.0 - l2 - l3, l2, l3};
}

int locate_triangle(const Mesh& mesh, Vec2 p, std::array<double, 3>& bary) {
  static thread_local const Mesh* cached_mesh = nullptr;
  static thread_local std::vector<std::array<int, 3>> nb;
  static thread_local int hint = 0;
  int ntri = static_cast<int>(mesh.triangles.size());
  if (cached_mesh != &mesh) {
    cached_mesh = &mesh;
    hint = 0;
    nb.assign(ntri, {-1, -1, -1});
    std::unordered_map<uint64_t, std::pair<int, int>> half;
    for (int tt = 0; tt < ntri; ++tt)
      for (int e = 0; e < 3; ++e) {
        int a = mesh.triangles[tt][(e + 1) % 3], b = mesh.triangles[tt][(e + 2) % 3];
        uint64_t key = (static_cast<uint64_t>(std::min(a, b)) << 32) |
                       static_cast<uint32_t>(std::max(a, b));
        auto it = half.find(key);
        if (it == half.end()) {
          half[key] = {tt, e};
        } else {
          nb[tt][e] = it->second.first;
          nb[it->second.first][it->second.second] = tt;
        }
      }
  }

  int t = std::clamp(hint, 0, ntri - 1);
  int prev = -1;
  for (int steps = 0; steps < ntri + 16; ++steps) {
    const auto& tri = mesh.triangles[t];
    bary = barycentric(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], p);
    int worst = 0;
    for (int i = 1; i < 3; ++i)
      if (bary[i] < bary[worst]) worst = i;
    if (bary[worst] >= -1e-12) {
      hint = t;
      return t;
    }
    int next = nb[t][worst];
    if (next < 0 || next == prev) break;
    prev = t;
    t = next;
  }
  // tolerance pass for points in the curved slivers along the boundary
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_bary{};
  for (int tt = 0; tt < ntri; ++tt) {
    const auto& tri = mesh.triangles[tt];
    auto bc = barycentric(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], p);
    double mn = std::min({bc[0], bc[1], bc[2]});
    if (mn > best_min) {
      best_min = mn;
      best = tt;
      best_bary = bc;
    }
  }
  if (best >= 0 && best_min > -0.05) {
    for (double& v : best_bary) v = std::max(v, 0.0);
    double s = best_bary[0] + best_bary[1] + best_bary[2];
    for (double& v : best_bary) v /= s;
    bary = best_bary;
    hint = best;
    return best;
  }
  fail("OutsideDomain", "point not inside the mesh");
}

}  // namespace

double FemSolution::operator()(Vec2 x) const { return evaluate(*this, x, 0).u; }

PointValue evaluate(const FemSolution& sol, Vec2 x, int deriv_order) {
  const Mesh& mesh = *sol.mesh;
  std::array<double, 3> bary;
  int t = locate_triangle(mesh, x, bary);
  BasisEval be = element_basis(mesh, t, bary, 0.0, deriv_order >= 2);
  PointValue out;
  int per_elem = sol.order == 2 ? 6 : 3;
  for (int i = 0; i < per_elem; ++i) {
    double c = sol.coeffs[element_dof(mesh, t, i)];
    out.u += c * be.N[i];
    if (deriv_order >= 1) out.grad += c * be.dN[i];
    if (deriv_order >= 2)
      for (int k = 0; k < 3; ++k) out.hess[k] += c * be.d2N[i][k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sources and export

std::function<double(Vec2)> source_preset(const std::string& name, Vec2 center, double scale,
                                          unsigned long seed) {
  if (name == "one") return [](Vec2) { return 1.0; };
  if (name == "zero") return [](Vec2) { return 0.0; };
  if (name == "sine")
    return [](Vec2 x) { return -2.0 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  if (name == "bump") {
    double w2 = 2.0 * (0.1 * scale) * (0.1 * scale);
    return [center, w2](Vec2 x) { return std::exp(-norm2(x - center) / w2); };
  }
  if (name == "rbump") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vec2> centers;
    std::vector<double> widths, amps;
    for (int k = 0; k < 5; ++k) {
      centers.push_back(center + 0.3 * scale * Vec2{uni(rng), uni(rng)});
      widths.push_back(2.0 * std::pow(0.05 * scale * (1.2 + uni(rng) * 0.5), 2.0));
      amps.push_back(uni(rng));
    }
    return [=](Vec2 x) {
      double s = 0.0;
      for (size_t k = 0; k < centers.size(); ++k)
        s += amps[k] * std::exp(-norm2(x - centers[k]) / widths[k]);
      return s;
    };
  }
  fail("OutsideDomain", "unknown source preset '" + name + "'");
}

std::string solution_to_text(const FemSolution& sol) {
  std::ostringstream os;
  os.precision(12);
  const Mesh& mesh = *sol.mesh;
  for (int i = 0; i < mesh.num_vertices; ++i)
    os << mesh.nodes[i].x << " " << mesh.nodes[i].y << " " << sol.coeffs[i] << "\n";
  return os.str();
}

}  // namespace roundfem
