#pragma once

#include <array>
#include <string>
#include <vector>

#include "roundfem/geometry.hpp"
#include "roundfem/mesh.hpp"
#include "roundfem/weights.hpp"

namespace roundfem {

/// Graph-geodesic distances in the conformal metric from the given source
/// vertices (Dijkstra over triangle edges plus convex-quad diagonals; edge
/// weights by 5-point Gauss of 1/r). Upward bias of order h.
std::vector<double> mesh_geodesic_distances(const Mesh& mesh, const WeightFunction& w,
                                            const std::vector<int>& sources);

/// Max distance to the boundary over mesh vertices.
double finite_width_estimate(const RoundedDomain& dom, const WeightFunction& w, const Mesh& mesh);

/// Width restricted to vertices inside the corner balls B(p_jn, R/8).
double corner_ball_max_width(const RoundedDomain& dom, const WeightFunction& w, const Mesh& mesh);

/// Normal-reach proxy: geodesics of the conformal metric shot along both
/// unit normals from boundary samples; first re-crossing parameter, capped
/// at 10, minimized over samples.
double normal_reach_estimate(const RoundedDomain& dom, const WeightFunction& w, int samples,
                             double cap = 10.0);

struct BgRow {
  int n = 0;
  std::array<double, 5> sup_kappa{};  // d^k kappa/ds^k for k = 0..4
  double width_sup = 0.0;
  double reach_min = 0.0;
  bool flags_clean = true;
};

struct BgReport {
  std::vector<BgRow> rows;
  /// max/min over rows, per metric index 0..6 (kappa0..4, width, reach)
  std::array<double, 7> uniformity_ratio() const;
};

/// Per-index diagnostics for the family built from the parameter template
/// (rho, rho' fixed, n swept).
BgReport bg_report(const Polygon& poly, const RoundingParams& params_template,
                   const std::vector<int>& n_list, const SizingField& sizing_template,
                   int reach_samples);

std::string bg_report_csv(const BgReport& report);
BgReport bg_report_from_csv(const std::string& text);

}  // namespace roundfem
