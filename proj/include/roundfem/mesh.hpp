#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "roundfem/core.hpp"
#include "roundfem/geometry.hpp"
#include "roundfem/weights.hpp"

namespace roundfem {

/// Target element size h(x) = clamp(beta * r(x)^exponent, h_min, h_max);
/// uniform h_max when no weight is attached.
struct SizingField {
  double h_max = 0.1;
  double h_min = 1e-6;
  double beta = 0.5;
  double exponent = 1.0;
  const WeightFunction* weight = nullptr;

  double operator()(Vec2 x) const {
    if (!weight) return h_max;
    double rr = weight->r(x);
    double h = exponent == 1.0 ? beta * rr : beta * std::pow(rr, exponent);
    return std::clamp(h, h_min, h_max);
  }
};

/// Closed boundary loop sampled piecewise; carries enough parametrization
/// to split edges back onto the true curve.
struct MarkedPolyline {
  std::vector<Vec2> points;
  std::vector<int> piece_id;    // per point: the piece it starts/continues
  std::vector<double> piece_s;  // per point: arc-length parameter on piece
  std::vector<double> piece_len;              // length per piece id
  std::function<Vec2(int, double)> curve;     // exact evaluator, may be null
  double length() const;
};

MarkedPolyline discretize_boundary(const RoundedDomain& dom, const SizingField& sizing);
/// Plain closed polygon (chords are the exact geometry).
MarkedPolyline polygon_boundary(const Polygon& poly, const SizingField& sizing);

struct Mesh {
  std::vector<Vec2> nodes;  // P1 vertices first, then P2 edge nodes
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 6>> tri_nodes;  // order 2: v0 v1 v2 m01 m12 m20
  std::vector<int> node_marker;               // piece id or -1 interior
  int order = 1;

  struct BoundaryEdge {
    int a = 0, b = 0;     // vertex nodes, in boundary direction
    int piece = 0;
    double sa = 0.0, sb = 0.0;
  };
  std::vector<BoundaryEdge> boundary_edges;

  int num_vertices = 0;  // vertex count (nodes may add P2 midpoints)
  double area() const;
  /// Vertex adjacency (triangle edges), built on demand.
  const std::vector<std::vector<int>>& vertex_neighbors() const;

 private:
  mutable std::vector<std::vector<int>> neighbors_;
};

Mesh triangulate(const MarkedPolyline& boundary, const SizingField& sizing, int order = 1);

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_aspect = 0.0;  // longest / shortest edge
  int nodes = 0;
  int elements = 0;
  std::vector<int> h_histogram;  // 16 log-spaced bins over edge lengths
  double h_min = 0.0, h_max = 0.0;
};

MeshQuality mesh_quality(const Mesh& mesh);

/// Text format: "N_nodes N_tris order", node lines "x y marker", element
/// lines "i j k [l m n]" (0-based).
std::string mesh_to_text(const Mesh& mesh);
Mesh mesh_from_text(const std::string& text);

}  // namespace roundfem
