#include "roundfem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "roundfem/predicates.hpp"

namespace roundfem {

namespace {

constexpr double kGL5x[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                             0.76923465505284155, 0.95308992296933200};
constexpr double kGL5w[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                             0.23931433524968324, 0.11846344252809454};

double edge_gweight(Vec2 a, Vec2 b, const WeightFunction& w) {
  double len = dist(a, b);
  double acc = 0.0;
  for (int q = 0; q < 5; ++q) acc += kGL5w[q] / w.r(a + kGL5x[q] * (b - a));
  return len * acc;
}

}  // namespace

std::vector<double> mesh_geodesic_distances(const Mesh& mesh, const WeightFunction& w,
                                            const std::vector<int>& sources) {
  int n = mesh.num_vertices;
  // edge set: triangle edges plus the crossing diagonal of each convex quad
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  auto add_edge = [&](int a, int b) {
    double wt = edge_gweight(mesh.nodes[a], mesh.nodes[b], w);
    adj[a].push_back({b, wt});
    adj[b].push_back({a, wt});
  };
  std::unordered_map<uint64_t, std::pair<int, int>> half;  // edge -> (tri, opposite vertex)
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      if (a < b) add_edge(a, b);
      uint64_t key = (static_cast<uint64_t>(std::min(a, b)) << 32) |
                     static_cast<uint32_t>(std::max(a, b));
      auto it = half.find(key);
      if (it == half.end()) {
        half[key] = {t[i], -1};
      } else {
        it->second.second = t[i];
      }
    }
  }
  for (const auto& [key, opp] : half) {
    if (opp.second < 0) continue;
    int a = static_cast<int>(key & 0xffffffffu);
    int b = static_cast<int>(key >> 32);
    int c = opp.first, d = opp.second;
    // diagonal (c, d) usable when it crosses (a, b)
    if (orient2d(mesh.nodes[c], mesh.nodes[d], mesh.nodes[a]) !=
            orient2d(mesh.nodes[c], mesh.nodes[d], mesh.nodes[b]) &&
        orient2d(mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]) !=
            orient2d(mesh.nodes[a], mesh.nodes[b], mesh.nodes[d]))
      add_edge(c, d);
  }

  std::vector<double> distv(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int s : sources) {
    distv[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > distv[v]) continue;
    for (auto [u, wt] : adj[v])
      if (d + wt < distv[u]) {
        distv[u] = d + wt;
        pq.push({distv[u], u});
      }
  }
  return distv;
}

double finite_width_estimate(const RoundedDomain& dom, const WeightFunction& w, const Mesh& mesh) {
  (void)dom;
  if (mesh.triangles.empty()) fail("MeshMissing", "finite width needs a mesh");
  std::vector<int> sources;
  for (int i = 0; i < mesh.num_vertices; ++i)
    if (mesh.node_marker[i] >= 0) sources.push_back(i);
  if (sources.empty()) fail("MeshMissing", "mesh has no boundary markers");
  auto d = mesh_geodesic_distances(mesh, w, sources);
  double width = 0.0;
  for (int i = 0; i < mesh.num_vertices; ++i)
    if (std::isfinite(d[i])) width = std::max(width, d[i]);
  return width;
}

double corner_ball_max_width(const RoundedDomain& dom, const WeightFunction& w, const Mesh& mesh) {
  if (mesh.triangles.empty()) fail("MeshMissing", "corner width needs a mesh");
  std::vector<int> sources;
  for (int i = 0; i < mesh.num_vertices; ++i)
    if (mesh.node_marker[i] >= 0) sources.push_back(i);
  auto d = mesh_geodesic_distances(mesh, w, sources);
  double ball = w.eta().R() / 8.0;
  double width = 0.0;
  for (int i = 0; i < mesh.num_vertices; ++i) {
    if (!std::isfinite(d[i])) continue;
    for (Vec2 p : dom.punctures)
      if (dist(mesh.nodes[i], p) <= ball) width = std::max(width, d[i]);
  }
  return width;
}

// ---------------------------------------------------------------------------
// Normal reach by geodesic shooting

namespace {

struct SegmentGrid {
  Vec2 lo, hi;
  double cell = 1.0;
  int nx = 1, ny = 1;
  std::vector<Vec2> pts;  // closed polyline
  std::vector<std::vector<int>> cells;

  explicit SegmentGrid(const std::vector<Vec2>& polyline) : pts(polyline) {
    lo = hi = pts[0];
    double max_seg = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      lo.x = std::min(lo.x, pts[i].x);
      lo.y = std::min(lo.y, pts[i].y);
      hi.x = std::max(hi.x, pts[i].x);
      hi.y = std::max(hi.y, pts[i].y);
      if (i + 1 < pts.size()) max_seg = std::max(max_seg, dist(pts[i], pts[i + 1]));
    }
    Vec2 span = hi - lo;
    cell = std::max({max_seg, span.x / 512.0, span.y / 512.0, 1e-12});
    nx = std::max(1, static_cast<int>(span.x / cell) + 1);
    ny = std::max(1, static_cast<int>(span.y / cell) + 1);
    cells.resize(static_cast<size_t>(nx) * ny);
    for (size_t i = 0; i + 1 < pts.size(); ++i) insert_segment(static_cast<int>(i));
  }

  void insert_segment(int i) {
    Vec2 a = pts[i], b = pts[i + 1];
    int x0 = cx(std::min(a.x, b.x)), x1 = cx(std::max(a.x, b.x));
    int y0 = cy(std::min(a.y, b.y)), y1 = cy(std::max(a.y, b.y));
    for (int x = x0; x <= x1; ++x)
      for (int y = y0; y <= y1; ++y) cells[static_cast<size_t>(y) * nx + x].push_back(i);
  }

  int cx(double x) const { return std::clamp(static_cast<int>((x - lo.x) / cell), 0, nx - 1); }
  int cy(double y) const { return std::clamp(static_cast<int>((y - lo.y) / cell), 0, ny - 1); }

  bool crosses(Vec2 a, Vec2 b) const {
    int x0 = cx(std::min(a.x, b.x)), x1 = cx(std::max(a.x, b.x));
    int y0 = cy(std::min(a.y, b.y)), y1 = cy(std::max(a.y, b.y));
    for (int x = x0; x <= x1; ++x)
      for (int y = y0; y <= y1; ++y)
        for (int i : cells[static_cast<size_t>(y) * nx + x]) {
          Vec2 p = pts[i], q = pts[i + 1];
          int o1 = orient2d(a, b, p), o2 = orient2d(a, b, q);
          int o3 = orient2d(p, q, a), o4 = orient2d(p, q, b);
          if (o1 * o2 < 0 && o3 * o4 < 0) return true;
        }
    return false;
  }
};

}  // namespace

double normal_reach_estimate(const RoundedDomain& dom, const WeightFunction& w, int samples,
                             double cap) {
  if (samples < 64) samples = 64;
  std::vector<Vec2> polyline = dom.sample_boundary(1e-7 * dom.params.rho / dom.n);
  SegmentGrid grid(polyline);

  // boundary samples uniform in the conformal arc length
  double total = dom.boundary_length();
  double ghat_total = 0.0;
  {
    double t = 0.0;
    while (t < total) {
      double rr = w.r(dom.boundary_point(t));
      double dt = std::min(0.005 * rr, total * 1e-3);
      ghat_total += dt / rr;
      t += dt;
    }
  }
  double spacing = ghat_total / samples;

  double reach = cap;
  double t = 0.0, acc = 0.0;
  const double step = 1e-3;   // conformal arc-length step of the shooter
  const double guard = 5e-3;  // departure phase, no crossing checks yet
  while (t < total) {
    Vec2 x0 = dom.boundary_point(t);
    double rr = w.r(x0);
    if (acc >= spacing) {
      acc = 0.0;
      Vec2 tangent = dom.boundary_tangent(t);
      Vec2 outward{tangent.y, -tangent.x};
      for (double side : {1.0, -1.0}) {
        Vec2 nu = side * outward;
        // launch slightly off the boundary along nu
        Vec2 x = x0 + (1e-6 * rr) * nu;
        Vec2 v = w.r(x) * nu;  // unit speed in the conformal metric
        double time = 0.0;
        while (time < std::min(reach, cap)) {
          auto rhs = [&](Vec2 xx, Vec2 vv, Vec2& ax) {
            double rloc = w.r(xx);
            if (w.puncture_distance(xx) < 1e-9) fail("OdeStep", "geodesic hit a puncture");
            Vec2 gphi = -1.0 / rloc * w.grad(xx);  // grad of -log r
            ax = -2.0 * dot(gphi, vv) * vv + norm2(vv) * gphi;
          };
          Vec2 k1v, k2v, k3v, k4v;
          Vec2 k1x = v;
          rhs(x, v, k1v);
          Vec2 k2x = v + 0.5 * step * k1v;
          rhs(x + 0.5 * step * k1x, k2x, k2v);
          Vec2 k3x = v + 0.5 * step * k2v;
          rhs(x + 0.5 * step * k2x, k3x, k3v);
          Vec2 k4x = v + step * k3v;
          rhs(x + step * k3x, k4x, k4v);
          Vec2 x_new = x + (step / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
          Vec2 v_new = v + (step / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
          time += step;
          if (time > guard && grid.crosses(x, x_new)) {
            reach = std::min(reach, time);
            break;
          }
          x = x_new;
          v = v_new;
        }
      }
    }
    double dt = std::min(0.005 * rr, total * 1e-3);
    acc += dt / rr;
    t += dt;
  }
  return reach;
}

// ---------------------------------------------------------------------------
// Family report

std::array<double, 7> BgReport::uniformity_ratio() const {
  std::array<double, 7> lo{}, hi{}, out{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(0.0);
  for (const BgRow& r : rows) {
    for (int k = 0; k < 5; ++k) {
      lo[k] = std::min(lo[k], r.sup_kappa[k]);
      hi[k] = std::max(hi[k], r.sup_kappa[k]);
    }
    lo[5] = std::min(lo[5], r.width_sup);
    hi[5] = std::max(hi[5], r.width_sup);
    lo[6] = std::min(lo[6], r.reach_min);
    hi[6] = std::max(hi[6], r.reach_min);
  }
  for (int k = 0; k < 7; ++k) out[k] = lo[k] > 0.0 ? hi[k] / lo[k] : 0.0;
  return out;
}

BgReport bg_report(const Polygon& poly, const RoundingParams& params_template,
                   const std::vector<int>& n_list, const SizingField& sizing_template,
                   int reach_samples) {
  BgReport report;
  for (int n : n_list) {
    RoundingParams params = params_template;
    params.n = n;
    RoundedDomain dom = construct_rounded_domain(poly, params);
    WeightFunction w = make_weight(dom);
    BgRow row;
    row.n = n;
    for (int k = 0; k <= 4; ++k)
      row.sup_kappa[k] = curvature_profile(dom, w, k, 0.05).sup_abs;
    SizingField sizing = sizing_template;
    sizing.weight = &w;
    Mesh mesh = triangulate(discretize_boundary(dom, sizing), sizing);
    row.width_sup = finite_width_estimate(dom, w, mesh);
    row.reach_min = normal_reach_estimate(dom, w, reach_samples);
    row.flags_clean = std::isfinite(row.width_sup) && row.width_sup > 0.0 &&
                      row.reach_min > 0.0;
    for (double v : row.sup_kappa) row.flags_clean = row.flags_clean && std::isfinite(v);
    report.rows.push_back(row);
  }
  return report;
}

std::string bg_report_csv(const BgReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "n,k,sup_kappa_k,width_sup,reach_min\n";
  for (const BgRow& r : report.rows)
    for (int k = 0; k <= 4; ++k)
      os << r.n << "," << k << "," << r.sup_kappa[k] << "," << r.width_sup << "," << r.reach_min
         << "\n";
  return os.str();
}

BgReport bg_report_from_csv(const std::string& text) {
  BgReport report;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  BgRow row;
  bool have = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    int n, k;
    double sk, width, reach;
    ls >> n >> k >> sk >> width >> reach;
    if (!have || row.n != n) {
      if (have) report.rows.push_back(row);
      row = BgRow{};
      row.n = n;
      have = true;
    }
    row.sup_kappa[k] = sk;
    row.width_sup = width;
    row.reach_min = reach;
    row.flags_clean = true;
  }
  if (have) report.rows.push_back(row);
  return report;
}

}  // namespace roundfem
