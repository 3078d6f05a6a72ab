#include "roundfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "roundfem/predicates.hpp"

namespace roundfem {

// ---------------------------------------------------------------------------
// Boundary discretization

double MarkedPolyline::length() const {
  double total = 0.0;
  size_t n = points.size();
  for (size_t i = 0; i < n; ++i) total += dist(points[i], points[(i + 1) % n]);
  return total;
}

namespace {

// distance from m to the chord (a, b)
double chord_deviation(Vec2 a, Vec2 b, Vec2 m) {
  Vec2 ab = b - a;
  double len = norm(ab);
  if (len == 0.0) return dist(a, m);
  return std::abs(cross(ab, m - a)) / len;
}

void subdivide_piece(const std::function<Vec2(double)>& eval, double s0, double s1,
                     const SizingField& sizing, bool curved, int depth,
                     std::vector<double>& out) {
  Vec2 a = eval(s0), b = eval(s1);
  double mid_s = 0.5 * (s0 + s1);
  Vec2 m = eval(mid_s);
  double chord = dist(a, b);
  double h = sizing(m);
  bool ok = chord <= h;
  if (ok && curved) ok = chord_deviation(a, b, m) <= h * h / 8.0;
  if (ok || depth > 30) {
    out.push_back(s0);
    return;
  }
  subdivide_piece(eval, s0, mid_s, sizing, curved, depth + 1, out);
  subdivide_piece(eval, mid_s, s1, sizing, curved, depth + 1, out);
}

}  // namespace

MarkedPolyline discretize_boundary(const RoundedDomain& dom, const SizingField& sizing) {
  MarkedPolyline out;
  out.piece_len.resize(dom.pieces.size());
  for (const BoundaryPiece& piece : dom.pieces) {
    out.piece_len[piece.id] = piece.length;
    std::vector<double> params;
    auto eval = [&](double s) { return piece.point(s); };
    subdivide_piece(eval, 0.0, piece.length, sizing, piece.is_arc(), 0, params);
    for (double s : params) {
      out.points.push_back(piece.point(s));
      out.piece_id.push_back(piece.id);
      out.piece_s.push_back(s);
    }
  }
  auto pieces = dom.pieces;
  out.curve = [pieces](int piece, double s) { return pieces[piece].point(s); };
  return out;
}

MarkedPolyline polygon_boundary(const Polygon& poly, const SizingField& sizing) {
  MarkedPolyline out;
  int n = poly.size();
  out.piece_len.resize(n);
  for (int e = 0; e < n; ++e) {
    Vec2 a = poly.vertex(e), b = poly.vertex(e + 1);
    double len = dist(a, b);
    out.piece_len[e] = len;
    std::vector<double> params;
    auto eval = [&](double s) { return a + (s / len) * (b - a); };
    subdivide_piece(eval, 0.0, len, sizing, false, 0, params);
    for (double s : params) {
      out.points.push_back(eval(s));
      out.piece_id.push_back(e);
      out.piece_s.push_back(s);
    }
  }
  auto vertices = poly.vertices;
  out.curve = [vertices](int e, double s) {
    int n2 = static_cast<int>(vertices.size());
    Vec2 a = vertices[e % n2], b = vertices[(e + 1) % n2];
    return a + (s / dist(a, b)) * (b - a);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Constrained Delaunay triangulation with Ruppert-style refinement

namespace {

constexpr double kQualityBound = 1.4619022;  // circumradius/shortest edge at 20 degrees

struct Constraint {
  int from = 0, to = 0;  // boundary direction: interior on the left
  int piece = 0;
  double sa = 0.0, sb = 0.0;
};

uint64_t edge_key(int a, int b) {
  uint64_t lo = static_cast<uint32_t>(std::min(a, b));
  uint64_t hi = static_cast<uint32_t>(std::max(a, b));
  return (hi << 32) | lo;
}

class Triangulator {
 public:
  Triangulator(const MarkedPolyline& boundary, const SizingField& sizing)
      : boundary_(boundary), sizing_(sizing) {}

  Mesh run(int order);

 private:
  struct Tri {
    int v[3];
    int nb[3];  // nb[i] across edge (v[i+1], v[i+2])
    bool alive = true;
    bool inside = false;
  };

  const MarkedPolyline& boundary_;
  const SizingField& sizing_;
  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> v2t_;
  std::unordered_map<uint64_t, Constraint> constraints_;
  std::deque<uint64_t> seg_queue_;
  std::deque<int> tri_queue_;
  std::unordered_set<int> sharp_;
  long inserted_ = 0;

  Vec2 pt(int i) const { return pts_[i]; }

  int new_tri(int a, int b, int c) {
    Tri t;
    t.v[0] = a;
    t.v[1] = b;
    t.v[2] = c;
    t.nb[0] = t.nb[1] = t.nb[2] = -1;
    tris_.push_back(t);
    int id = static_cast<int>(tris_.size()) - 1;
    v2t_[a] = v2t_[b] = v2t_[c] = id;
    return id;
  }

  int local_index(int t, int v) const {
    for (int i = 0; i < 3; ++i)
      if (tris_[t].v[i] == v) return i;
    return -1;
  }

  int neighbor_slot(int t, int other) const {
    for (int i = 0; i < 3; ++i)
      if (tris_[t].nb[i] == other) return i;
    return -1;
  }

  bool in_triangle(int t, Vec2 p) const {
    const Tri& tr = tris_[t];
    for (int i = 0; i < 3; ++i)
      if (orient2d(pt(tr.v[(i + 1) % 3]), pt(tr.v[(i + 2) % 3]), p) < 0) return false;
    return true;
  }

  int locate(Vec2 p, int hint) const {
    int t = hint;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) t = first_alive();
    int prev = -1;
    for (long steps = 0; steps < static_cast<long>(tris_.size()) + 16; ++steps) {
      const Tri& tr = tris_[t];
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        if (tr.nb[i] == prev) continue;
        if (orient2d(pt(tr.v[(i + 1) % 3]), pt(tr.v[(i + 2) % 3]), p) < 0) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        if (in_triangle(t, p)) return t;
        break;
      }
      if (tr.nb[next] < 0) break;
      prev = t;
      t = tr.nb[next];
    }
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i)
      if (tris_[i].alive && in_triangle(i, p)) return i;
    fail("EncroachmentLoop", "point location failed");
  }

  int first_alive() const {
    for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
      if (tris_[i].alive) return i;
    return 0;
  }

  bool is_constrained(int a, int b) const { return constraints_.count(edge_key(a, b)) > 0; }

  // Bowyer-Watson insertion. When encroached_out is given and the point lies
  // inside the diametral circle of a constrained cavity edge, nothing is
  // modified: the offending edges are reported and -1 returned.
  int insert_point(Vec2 p, int hint, const std::vector<int>& forced_seeds = {},
                   std::vector<uint64_t>* encroached_out = nullptr) {
    if (++inserted_ > 4000000) fail("RefinementStalled", "too many insertions");
    int t0 = forced_seeds.empty() ? locate(p, hint) : forced_seeds[0];

    for (int i = 0; i < 3; ++i)
      if (dist(pt(tris_[t0].v[i]), p) < 1e-14) return tris_[t0].v[i];

    std::vector<int> cavity;
    std::unordered_set<int> in_cavity;
    std::deque<int> work;
    auto push = [&](int t) {
      if (t >= 0 && tris_[t].alive && !in_cavity.count(t)) {
        in_cavity.insert(t);
        work.push_back(t);
      }
    };
    push(t0);
    for (int s : forced_seeds) push(s);
    // a point exactly on an interior edge invalidates both flanking triangles
    if (forced_seeds.empty()) {
      const Tri& tr = tris_[t0];
      for (int i = 0; i < 3; ++i)
        if (orient2d(pt(tr.v[(i + 1) % 3]), pt(tr.v[(i + 2) % 3]), p) == 0 &&
            !is_constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]))
          push(tr.nb[i]);
    }
    while (!work.empty()) {
      int t = work.front();
      work.pop_front();
      cavity.push_back(t);
      const Tri tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int n = tr.nb[i];
        if (n < 0 || in_cavity.count(n)) continue;
        if (is_constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])) continue;
        const Tri& nt = tris_[n];
        if (incircle(pt(nt.v[0]), pt(nt.v[1]), pt(nt.v[2]), p) > 0) push(n);
      }
    }

    if (encroached_out) {
      for (int t : cavity) {
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
          int ea = tr.v[(i + 1) % 3], eb = tr.v[(i + 2) % 3];
          if (!is_constrained(ea, eb)) continue;
          if (dot(pt(ea) - p, pt(eb) - p) < 0.0) encroached_out->push_back(edge_key(ea, eb));
        }
      }
      if (!encroached_out->empty()) return -1;  // nothing touched yet
    }

    struct CavityEdge {
      int a, b, outside;
      bool inside_flag;
    };
    std::vector<CavityEdge> bedges;
    for (int t : cavity) {
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int n = tr.nb[i];
        if (n >= 0 && in_cavity.count(n)) continue;
        bedges.push_back({tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], n, tr.inside});
      }
    }
    for (int t : cavity) tris_[t].alive = false;

    int vp = static_cast<int>(pts_.size());
    pts_.push_back(p);
    v2t_.push_back(-1);

    std::unordered_map<int, int> fan_at, fan_end;
    std::vector<int> created;
    for (const CavityEdge& e : bedges) {
      int t = new_tri(e.a, e.b, vp);
      tris_[t].inside = e.inside_flag;
      tris_[t].nb[2] = e.outside;
      if (e.outside >= 0) {
        for (int i = 0; i < 3; ++i) {
          const Tri& ot = tris_[e.outside];
          if (ot.v[(i + 1) % 3] == e.b && ot.v[(i + 2) % 3] == e.a) tris_[e.outside].nb[i] = t;
        }
      }
      fan_at[e.a] = t;
      fan_end[e.b] = t;
      created.push_back(t);
    }
    for (const CavityEdge& e : bedges) {
      int t = fan_at[e.a];
      tris_[t].nb[0] = fan_at.count(e.b) ? fan_at[e.b] : -1;   // across (b, p)
      tris_[t].nb[1] = fan_end.count(e.a) ? fan_end[e.a] : -1; // across (p, a)
    }
    for (int t : created) {
      maybe_queue_triangle(t);
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int ea = tr.v[(i + 1) % 3], eb = tr.v[(i + 2) % 3];
        if (is_constrained(ea, eb) && segment_encroached(ea, eb))
          seg_queue_.push_back(edge_key(ea, eb));
      }
    }
    return vp;
  }

  bool flip(int t1, int t2) {
    int i1 = neighbor_slot(t1, t2), i2 = neighbor_slot(t2, t1);
    if (i1 < 0 || i2 < 0) return false;
    int c = tris_[t1].v[i1], d = tris_[t2].v[i2];
    int a = tris_[t1].v[(i1 + 1) % 3], b = tris_[t1].v[(i1 + 2) % 3];
    if (is_constrained(a, b)) return false;
    int oa = orient2d(pt(c), pt(d), pt(a)), ob = orient2d(pt(c), pt(d), pt(b));
    if (oa == 0 || ob == 0 || oa == ob) return false;

    int n_bc = tris_[t1].nb[(i1 + 1) % 3];  // opposite a: edge (b, c)
    int n_ca = tris_[t1].nb[(i1 + 2) % 3];  // opposite b: edge (c, a)
    int i2a = local_index(t2, a), i2b = local_index(t2, b);
    int n_ad = tris_[t2].nb[i2b];  // opposite b: edge (a, d)
    int n_db = tris_[t2].nb[i2a];  // opposite a: edge (d, b)

    bool inside_flag = tris_[t1].inside || tris_[t2].inside;
    tris_[t1].v[0] = c;
    tris_[t1].v[1] = a;
    tris_[t1].v[2] = d;
    tris_[t2].v[0] = d;
    tris_[t2].v[1] = b;
    tris_[t2].v[2] = c;
    tris_[t1].inside = inside_flag;
    tris_[t2].inside = inside_flag;
    tris_[t1].nb[0] = n_ad;
    tris_[t1].nb[1] = t2;
    tris_[t1].nb[2] = n_ca;
    tris_[t2].nb[0] = n_bc;
    tris_[t2].nb[1] = t1;
    tris_[t2].nb[2] = n_db;
    auto rewire = [&](int n, int self) {
      if (n < 0) return;
      for (int i = 0; i < 3; ++i) {
        int ea = tris_[n].v[(i + 1) % 3], eb = tris_[n].v[(i + 2) % 3];
        for (int k = 0; k < 3; ++k) {
          int sa = tris_[self].v[(k + 1) % 3], sb = tris_[self].v[(k + 2) % 3];
          if (ea == sb && eb == sa) {
            tris_[n].nb[i] = self;
            tris_[self].nb[k] = n;
          }
        }
      }
    };
    rewire(n_ad, t1);
    rewire(n_ca, t1);
    rewire(n_bc, t2);
    rewire(n_db, t2);
    v2t_[a] = t1;
    v2t_[b] = t2;
    v2t_[c] = t1;
    v2t_[d] = t1;
    maybe_queue_triangle(t1);
    maybe_queue_triangle(t2);
    return true;
  }

  std::vector<int> star(int v) const {
    std::vector<int> out;
    int t0 = v2t_[v];
    if (t0 < 0 || !tris_[t0].alive || local_index(t0, v) < 0) {
      t0 = -1;
      for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
        if (tris_[i].alive && local_index(i, v) >= 0) {
          t0 = i;
          break;
        }
      if (t0 < 0) return out;
    }
    int t = t0;
    for (int guard = 0; guard < (1 << 22); ++guard) {
      out.push_back(t);
      int li = local_index(t, v);
      int next = tris_[t].nb[(li + 1) % 3];
      if (next < 0 || next == t0) break;
      t = next;
    }
    return out;
  }

  bool edge_exists(int a, int b) const {
    for (int t : star(a))
      for (int i = 0; i < 3; ++i)
        if (tris_[t].v[i] == b) return true;
    return false;
  }

  void recover_edge(int a, int b) {
    for (int guard = 0; guard < 100000; ++guard) {
      if (edge_exists(a, b)) return;
      int cross_t = -1, cross_e = -1;
      for (int t : star(a)) {
        const Tri& tr = tris_[t];
        int li = local_index(t, a);
        int v1 = tr.v[(li + 1) % 3], v2 = tr.v[(li + 2) % 3];
        int o1 = orient2d(pt(a), pt(b), pt(v1));
        int o2 = orient2d(pt(a), pt(b), pt(v2));
        if (o1 == 0 || o2 == 0 || o1 == o2) continue;
        if (orient2d(pt(v1), pt(v2), pt(b)) != orient2d(pt(v1), pt(v2), pt(a))) {
          cross_t = t;
          cross_e = li;
          break;
        }
      }
      if (cross_t < 0) fail("EncroachmentLoop", "edge recovery lost the corridor");
      int t = cross_t, e = cross_e;
      bool flipped = false;
      for (int steps = 0; steps < 100000 && !flipped; ++steps) {
        int n = tris_[t].nb[e];
        if (n < 0) fail("EncroachmentLoop", "edge recovery left the mesh");
        if (flip(t, n)) {
          flipped = true;
          break;
        }
        const Tri& nt = tris_[n];
        int back = neighbor_slot(n, t);
        int found = -1;
        for (int i = 0; i < 3; ++i) {
          if (i == back) continue;
          int v1 = nt.v[(i + 1) % 3], v2 = nt.v[(i + 2) % 3];
          int o1 = orient2d(pt(a), pt(b), pt(v1));
          int o2 = orient2d(pt(a), pt(b), pt(v2));
          if (o1 != 0 && o2 != 0 && o1 != o2) {
            found = i;
            break;
          }
        }
        if (found < 0) fail("EncroachmentLoop", "edge recovery corridor broke");
        t = n;
        e = found;
      }
      if (!flipped) fail("EncroachmentLoop", "no flippable edge in corridor");
    }
    fail("EncroachmentLoop", "edge recovery did not converge");
  }

  void classify_from_constraints() {
    for (Tri& t : tris_)
      if (t.alive) t.inside = false;
    std::deque<int> work;
    for (const auto& [key, c] : constraints_) {
      (void)key;
      for (int t : star(c.from)) {
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i)
          if (tr.v[(i + 1) % 3] == c.from && tr.v[(i + 2) % 3] == c.to) {
            if (!tris_[t].inside) {
              tris_[t].inside = true;  // interior lies left of from->to
              work.push_back(t);
            }
          }
      }
    }
    while (!work.empty()) {
      int t = work.front();
      work.pop_front();
      const Tri tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int n = tr.nb[i];
        if (n < 0 || !tris_[n].alive || tris_[n].inside) continue;
        if (is_constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])) continue;
        tris_[n].inside = true;
        work.push_back(n);
      }
    }
  }

  double circumradius(int t, Vec2* center = nullptr) const {
    Vec2 a = pt(tris_[t].v[0]), b = pt(tris_[t].v[1]), c = pt(tris_[t].v[2]);
    double ux = ((b.x - a.x) * (b.x + a.x) + (b.y - a.y) * (b.y + a.y)) / 2.0;
    double uy = ((c.x - a.x) * (c.x + a.x) + (c.y - a.y) * (c.y + a.y)) / 2.0;
    double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (det == 0.0) {
      if (center) *center = a;
      return std::numeric_limits<double>::infinity();
    }
    Vec2 cc{(ux * (c.y - a.y) - uy * (b.y - a.y)) / det,
            ((b.x - a.x) * uy - (c.x - a.x) * ux) / det};
    if (center) *center = cc;
    return dist(cc, a);
  }

  bool bad_triangle(int t) const {
    const Tri& tr = tris_[t];
    if (!tr.alive || !tr.inside) return false;
    Vec2 a = pt(tr.v[0]), b = pt(tr.v[1]), c = pt(tr.v[2]);
    double e0 = dist(b, c), e1 = dist(c, a), e2 = dist(a, b);
    double shortest = std::min({e0, e1, e2});
    double longest = std::max({e0, e1, e2});
    if (longest > sizing_((a + b + c) / 3.0)) return true;
    if (circumradius(t) / shortest > kQualityBound) {
      int se_a, se_b;
      if (e0 == shortest) {
        se_a = tr.v[1];
        se_b = tr.v[2];
      } else if (e1 == shortest) {
        se_a = tr.v[2];
        se_b = tr.v[0];
      } else {
        se_a = tr.v[0];
        se_b = tr.v[1];
      }
      if (sharp_.count(se_a) || sharp_.count(se_b)) return false;
      return true;
    }
    return false;
  }

  void maybe_queue_triangle(int t) {
    if (bad_triangle(t)) tri_queue_.push_back(t);
  }

  bool segment_encroached(int a, int b) const {
    Vec2 pa = pt(a), pb = pt(b);
    for (int t : star(a)) {
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int va = tr.v[(i + 1) % 3], vb = tr.v[(i + 2) % 3];
        if ((va == a && vb == b) || (va == b && vb == a)) {
          int apex = tr.v[i];
          if (dot(pa - pt(apex), pb - pt(apex)) < 0.0) return true;
        }
      }
    }
    return false;
  }

  void split_segment(uint64_t key) {
    auto it = constraints_.find(key);
    if (it == constraints_.end()) return;
    Constraint c = it->second;
    constraints_.erase(it);

    double smid = 0.5 * (c.sa + c.sb);
    Vec2 midpoint =
        boundary_.curve ? boundary_.curve(c.piece, smid) : 0.5 * (pt(c.from) + pt(c.to));
    std::vector<int> seeds;
    for (int t : star(c.from)) {
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int va = tr.v[(i + 1) % 3], vb = tr.v[(i + 2) % 3];
        if ((va == c.from && vb == c.to) || (va == c.to && vb == c.from)) seeds.push_back(t);
      }
    }
    int m = insert_point(midpoint, seeds.empty() ? first_alive() : seeds[0], seeds);
    if (m == c.from || m == c.to) {
      // geometry exhausted; restore and leave the segment alone
      constraints_[key] = c;
      return;
    }
    if (!edge_exists(c.from, m)) recover_edge(c.from, m);
    if (!edge_exists(m, c.to)) recover_edge(m, c.to);
    constraints_[edge_key(c.from, m)] = {c.from, m, c.piece, c.sa, smid};
    constraints_[edge_key(m, c.to)] = {m, c.to, c.piece, smid, c.sb};

    // flags around the new vertex follow the constraint direction
    for (int t : star(m)) {
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        int va = tr.v[(i + 1) % 3], vb = tr.v[(i + 2) % 3];
        auto cit = constraints_.find(edge_key(va, vb));
        if (cit != constraints_.end())
          tris_[t].inside = (cit->second.from == va && cit->second.to == vb);
      }
    }
    for (uint64_t k : {edge_key(c.from, m), edge_key(m, c.to)}) {
      const Constraint& nc = constraints_[k];
      if (segment_encroached(nc.from, nc.to)) seg_queue_.push_back(k);
    }
    for (int t : star(m)) maybe_queue_triangle(t);
  }

  // Returns the blocking constrained-edge key, or 0 after inserting.
  uint64_t try_insert_circumcenter(int t) {
    Vec2 cc;
    double r = circumradius(t, &cc);
    if (!std::isfinite(r)) return 0;
    int cur = t, prev = -1;
    for (long steps = 0; steps < static_cast<long>(tris_.size()) + 16; ++steps) {
      if (in_triangle(cur, cc)) {
        std::vector<uint64_t> encroached;
        if (insert_point(cc, cur, {}, &encroached) < 0) return encroached.front();
        return 0;
      }
      const Tri& tr = tris_[cur];
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        if (tr.nb[i] == prev) continue;
        if (orient2d(pt(tr.v[(i + 1) % 3]), pt(tr.v[(i + 2) % 3]), cc) < 0) {
          if (is_constrained(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]))
            return edge_key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]);
          next = i;
          break;
        }
      }
      if (next < 0) {
        std::vector<uint64_t> encroached;
        if (insert_point(cc, cur, {}, &encroached) < 0) return encroached.front();
        return 0;
      }
      if (tr.nb[next] < 0) return 0;  // escaped the bounding box; drop it
      prev = cur;
      cur = tr.nb[next];
    }
    return 0;
  }

  void mark_sharp_corners(const std::vector<int>& ids) {
    size_t n = boundary_.points.size();
    for (size_t i = 0; i < n; ++i) {
      size_t prev = (i + n - 1) % n, next = (i + 1) % n;
      if (boundary_.piece_id[i] == boundary_.piece_id[prev] || boundary_.piece_s[i] != 0.0)
        continue;
      Vec2 a = boundary_.points[prev] - boundary_.points[i];
      Vec2 b = boundary_.points[next] - boundary_.points[i];
      double ang = std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
      if (ang < kPi / 3.0) sharp_.insert(ids[i]);
    }
  }
};

Mesh Triangulator::run(int order) {
  size_t n = boundary_.points.size();
  if (n < 3) fail("RefinementStalled", "boundary polyline too small");

  Vec2 lo = boundary_.points[0], hi = boundary_.points[0];
  for (Vec2 p : boundary_.points) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  double diam = std::max(hi.x - lo.x, hi.y - lo.y);
  Vec2 c = 0.5 * (lo + hi);
  double m = 10.0 * diam;
  pts_ = {c + Vec2{-m, -m}, c + Vec2{m, -m}, c + Vec2{m, m}, c + Vec2{-m, m}};
  v2t_.assign(4, -1);
  int t0 = new_tri(0, 1, 2);
  int t1 = new_tri(0, 2, 3);
  tris_[t0].nb[1] = t1;
  tris_[t1].nb[2] = t0;

  std::vector<int> ids(n);
  int hint = 0;
  for (size_t i = 0; i < n; ++i) {
    ids[i] = insert_point(boundary_.points[i], hint);
    hint = v2t_[ids[i]];
  }
  mark_sharp_corners(ids);

  for (size_t i = 0; i < n; ++i) {
    size_t j = (i + 1) % n;
    int a = ids[i], b = ids[j];
    if (a == b) continue;
    if (!edge_exists(a, b)) recover_edge(a, b);
    Constraint cst;
    cst.from = a;
    cst.to = b;
    cst.piece = boundary_.piece_id[i];
    cst.sa = boundary_.piece_s[i];
    cst.sb = (boundary_.piece_id[j] == boundary_.piece_id[i]) ? boundary_.piece_s[j]
                                                              : boundary_.piece_len[cst.piece];
    constraints_[edge_key(a, b)] = cst;
  }
  classify_from_constraints();

  for (const auto& [key, cst] : constraints_)
    if (segment_encroached(cst.from, cst.to)) seg_queue_.push_back(key);
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) maybe_queue_triangle(t);

  long iterations = 0;
  while (!seg_queue_.empty() || !tri_queue_.empty()) {
    if (++iterations > 20000000) fail("RefinementStalled", "refinement did not converge");
    if (!seg_queue_.empty()) {
      uint64_t key = seg_queue_.front();
      seg_queue_.pop_front();
      auto it = constraints_.find(key);
      if (it == constraints_.end()) continue;
      if (!segment_encroached(it->second.from, it->second.to)) continue;
      split_segment(key);
      continue;
    }
    int t = tri_queue_.front();
    tri_queue_.pop_front();
    if (t >= static_cast<int>(tris_.size()) || !tris_[t].alive || !bad_triangle(t)) continue;
    uint64_t blocking = try_insert_circumcenter(t);
    if (blocking != 0) {
      // the blocking subsegment shields the circumcenter; split it outright
      auto it = constraints_.find(blocking);
      if (it != constraints_.end() &&
          dist(pt(it->second.from), pt(it->second.to)) > 0.25 * sizing_.h_min) {
        split_segment(blocking);
        tri_queue_.push_back(t);
      }
      // otherwise drop the triangle; the floor keeps refinement finite
    }
  }

  classify_from_constraints();

  Mesh mesh;
  mesh.order = order;
  std::vector<int> remap(pts_.size(), -1);
  for (const Tri& t : tris_) {
    if (!t.alive || !t.inside) continue;
    for (int i = 0; i < 3; ++i)
      if (remap[t.v[i]] < 0) {
        remap[t.v[i]] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.push_back(pts_[t.v[i]]);
      }
  }
  mesh.num_vertices = static_cast<int>(mesh.nodes.size());
  mesh.node_marker.assign(mesh.num_vertices, -1);
  for (const Tri& t : tris_) {
    if (!t.alive || !t.inside) continue;
    std::array<int, 3> tri{remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]};
    if (orient2d(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) < 0)
      std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }
  for (const auto& [key, cst] : constraints_) {
    (void)key;
    int a = remap[cst.from], b = remap[cst.to];
    if (a < 0 || b < 0) continue;
    mesh.boundary_edges.push_back({a, b, cst.piece, cst.sa, cst.sb});
    mesh.node_marker[a] = cst.piece;
    if (mesh.node_marker[b] < 0) mesh.node_marker[b] = cst.piece;
  }

  if (order == 2) {
    std::unordered_map<uint64_t, Mesh::BoundaryEdge> bmap;
    for (const Mesh::BoundaryEdge& e : mesh.boundary_edges) bmap[edge_key(e.a, e.b)] = e;
    std::unordered_map<uint64_t, int> midpoint_of;
    mesh.tri_nodes.resize(mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      for (int i = 0; i < 3; ++i) mesh.tri_nodes[t][i] = tri[i];
      const int pair[3][2] = {{0, 1}, {1, 2}, {2, 0}};
      for (int e = 0; e < 3; ++e) {
        int a = tri[pair[e][0]], b = tri[pair[e][1]];
        uint64_t key = edge_key(a, b);
        auto found = midpoint_of.find(key);
        int node;
        if (found != midpoint_of.end()) {
          node = found->second;
        } else {
          Vec2 mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
          int marker = -1;
          auto bit = bmap.find(key);
          if (bit != bmap.end()) {
            marker = bit->second.piece;
            if (boundary_.curve)
              mid = boundary_.curve(bit->second.piece, 0.5 * (bit->second.sa + bit->second.sb));
          }
          node = static_cast<int>(mesh.nodes.size());
          mesh.nodes.push_back(mid);
          mesh.node_marker.push_back(marker);
          midpoint_of[key] = node;
        }
        mesh.tri_nodes[t][3 + e] = node;
      }
    }
  }
  return mesh;
}

}  // namespace

Mesh triangulate(const MarkedPolyline& boundary, const SizingField& sizing, int order) {
  Triangulator tr(boundary, sizing);
  return tr.run(order);
}

// ---------------------------------------------------------------------------
// Quality and IO

double Mesh::area() const {
  double s = 0.0;
  for (const auto& t : triangles)
    s += 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
  return s;
}

const std::vector<std::vector<int>>& Mesh::vertex_neighbors() const {
  if (!neighbors_.empty()) return neighbors_;
  neighbors_.resize(num_vertices);
  auto add = [&](int a, int b) {
    auto& v = neighbors_[a];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  };
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) {
      add(t[i], t[(i + 1) % 3]);
      add(t[(i + 1) % 3], t[i]);
    }
  return neighbors_;
}

MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q;
  q.nodes = static_cast<int>(mesh.nodes.size());
  q.elements = static_cast<int>(mesh.triangles.size());
  q.min_angle_deg = 180.0;
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  std::vector<double> lengths;
  for (const auto& t : mesh.triangles) {
    Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
    double e0 = dist(b, c), e1 = dist(c, a), e2 = dist(a, b);
    lengths.insert(lengths.end(), {e0, e1, e2});
    emin = std::min({emin, e0, e1, e2});
    emax = std::max({emax, e0, e1, e2});
    q.max_aspect = std::max(q.max_aspect, std::max({e0, e1, e2}) / std::min({e0, e1, e2}));
    auto angle = [](Vec2 u, Vec2 v) {
      return std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0)) * 180.0 / kPi;
    };
    q.min_angle_deg = std::min(
        {q.min_angle_deg, angle(b - a, c - a), angle(a - b, c - b), angle(a - c, b - c)});
  }
  q.h_min = emin;
  q.h_max = emax;
  q.h_histogram.assign(16, 0);
  for (double len : lengths) {
    double t = std::log(len / emin) / std::max(std::log(emax / emin), 1e-300);
    int bin = std::clamp(static_cast<int>(t * 16.0), 0, 15);
    q.h_histogram[bin]++;
  }
  return q;
}

std::string mesh_to_text(const Mesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << mesh.nodes.size() << " " << mesh.triangles.size() << " " << mesh.order << "\n";
  for (size_t i = 0; i < mesh.nodes.size(); ++i)
    os << mesh.nodes[i].x << " " << mesh.nodes[i].y << " " << mesh.node_marker[i] << "\n";
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (mesh.order == 2) {
      const auto& tn = mesh.tri_nodes[t];
      os << tn[0] << " " << tn[1] << " " << tn[2] << " " << tn[3] << " " << tn[4] << " " << tn[5]
         << "\n";
    } else {
      const auto& tn = mesh.triangles[t];
      os << tn[0] << " " << tn[1] << " " << tn[2] << "\n";
    }
  }
  return os.str();
}

Mesh mesh_from_text(const std::string& text) {
  std::istringstream is(text);
  size_t nn, nt;
  int order;
  is >> nn >> nt >> order;
  Mesh mesh;
  mesh.order = order;
  mesh.nodes.resize(nn);
  mesh.node_marker.resize(nn);
  for (size_t i = 0; i < nn; ++i) is >> mesh.nodes[i].x >> mesh.nodes[i].y >> mesh.node_marker[i];
  mesh.triangles.resize(nt);
  if (order == 2) mesh.tri_nodes.resize(nt);
  for (size_t t = 0; t < nt; ++t) {
    if (order == 2) {
      auto& tn = mesh.tri_nodes[t];
      for (int k = 0; k < 6; ++k) is >> tn[k];
      mesh.triangles[t] = {tn[0], tn[1], tn[2]};
    } else {
      auto& tn = mesh.triangles[t];
      is >> tn[0] >> tn[1] >> tn[2];
    }
  }
  int nv = 0;
  for (const auto& t : mesh.triangles) nv = std::max({nv, t[0] + 1, t[1] + 1, t[2] + 1});
  mesh.num_vertices = nv;
  return mesh;
}

}  // namespace roundfem
