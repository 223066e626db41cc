// 2D polytopal meshes with straight interior faces and optional circular-arc
// boundary faces: construction, file I/O, validation and per-cell metrics.
//
// Mesh text format (whitespace separated, '#' starts a comment):
//   vertices <nv>        followed by nv lines: x y
//   geometries <ng>      followed by ng lines: circle cx cy r
//   cells <nc>           followed by nc lines: m v1 v2 ... vm  (CCW, 0-based)
//   arcs <na>            followed by na lines: va vb geom_id
// Edges are the consecutive vertex pairs of each cell loop; an edge listed
// under `arcs` is a circular arc of the given geometry, all others straight.

#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "hho2d/geometry.hpp"

namespace hho2d {

enum class FaceKind { Straight, Arc };

struct Face {
  int id = -1;
  FaceKind kind = FaceKind::Straight;
  std::array<int, 2> v{-1, -1};      // endpoint vertex ids, in parametrization order
  std::array<int, 2> owners{-1, -1}; // owner cells; owners[1] == -1 on the boundary
  bool boundary = false;

  Point2 a{0, 0}, b{0, 0};  // endpoint coordinates (a = start of parametrization)
  double length = 0.0;
  Point2 midpoint{0, 0};

  // straight faces
  Point2 dir{1, 0};     // unit tangent a -> b
  Point2 normal{0, 1};  // fixed unit normal n_F = dir rotated -90 degrees

  // arc faces
  ArcGeometry geom;
  double theta0 = 0.0;  // angle of a on the circle
  double sweep = 0.0;   // signed; b sits at theta0 + sweep

  /// Physical point at parameter s in [0,1] (uniform in arc length).
  Point2 point_at(double s) const {
    if (kind == FaceKind::Straight) return a + s * (b - a);
    return geom.at_angle(theta0 + s * sweep);
  }

  /// Unit normal n_F at parameter s (constant on straight faces).
  Point2 normal_at(double s) const {
    if (kind == FaceKind::Straight) return normal;
    const double th = theta0 + s * sweep;
    const double sgn = sweep >= 0 ? 1.0 : -1.0;
    return sgn * Point2(std::cos(th), std::sin(th));
  }

  /// Unit tangent at parameter s; equals normal_at(s) rotated +90 degrees.
  Point2 tangent_at(double s) const { return rot90_ccw(normal_at(s)); }
};

struct Cell {
  int id = -1;
  std::vector<int> vertices;   // CCW loop
  std::vector<int> faces;      // face ids, loop order
  std::vector<double> signs;   // s_{K,F} = n_F . n_K per face
  double h = 0.0;              // diameter
  double area = 0.0;
  Point2 centroid{0, 0};
  bool on_boundary = false;    // true iff some face lies on the domain boundary
};

class Mesh2D {
 public:
  Mesh2D() = default;

  /// Build from raw data: vertex coordinates, CCW cell loops, circle
  /// geometries and the set of arc edges {unordered vertex pair -> geometry}.
  Mesh2D(std::vector<Point2> vertices, std::vector<std::vector<int>> loops,
         std::vector<ArcGeometry> geometries = {},
         std::map<std::pair<int, int>, int> arc_edges = {})
      : vertices_(std::move(vertices)),
        loops_(std::move(loops)),
        geometries_(std::move(geometries)),
        arc_edges_(std::move(arc_edges)) {
    finalize();
  }

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Face& face(int id) const { return faces_[id]; }
  const Cell& cell(int id) const { return cells_[id]; }
  const std::vector<ArcGeometry>& geometries() const { return geometries_; }
  const std::vector<std::vector<int>>& loops() const { return loops_; }
  const std::map<std::pair<int, int>, int>& arc_edges() const { return arc_edges_; }

  int n_cells() const { return static_cast<int>(cells_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  int n_interior_faces() const { return n_interior_; }

  /// Largest cell diameter.
  double mesh_size() const {
    double h = 0.0;
    for (const auto& c : cells_) h = std::max(h, c.h);
    return h;
  }

  double total_area() const {
    double a = 0.0;
    for (const auto& c : cells_) a += c.area;
    return a;
  }

  /// Cells sharing a face with `cell` (each interior face contributes one).
  std::vector<int> neighbors(int cell) const {
    std::vector<int> out;
    for (int f : cells_[cell].faces) {
      const auto& fc = faces_[f];
      if (fc.boundary) continue;
      out.push_back(fc.owners[0] == cell ? fc.owners[1] : fc.owners[0]);
    }
    return out;
  }

 private:
  std::vector<Point2> vertices_;
  std::vector<std::vector<int>> loops_;
  std::vector<ArcGeometry> geometries_;
  std::map<std::pair<int, int>, int> arc_edges_;

  std::vector<Face> faces_;
  std::vector<Cell> cells_;
  int n_interior_ = 0;

  static std::pair<int, int> edge_key(int a, int b) {
    return {std::min(a, b), std::max(a, b)};
  }

  void finalize();
  void compute_face_geometry(Face& f) const;
  void compute_cell_metrics(Cell& c) const;
};

// ---------------------------------------------------------------------------
// construction details

inline void Mesh2D::compute_face_geometry(Face& f) const {
  f.a = vertices_[f.v[0]];
  f.b = vertices_[f.v[1]];
  if (f.kind == FaceKind::Straight) {
    const Point2 d = f.b - f.a;
    f.length = d.norm();
    if (f.length <= 0.0) throw TopologyError("degenerate zero-length face");
    f.dir = d / f.length;
    f.normal = rot90_cw(f.dir);
    f.midpoint = 0.5 * (f.a + f.b);
  } else {
    const auto& g = f.geom;
    const double tol = 1e-12 * g.radius;
    if (std::abs(g.signed_distance(f.a)) > tol || std::abs(g.signed_distance(f.b)) > tol)
      throw GeometryError("arc endpoint does not lie on its circle (face " +
                          std::to_string(f.id) + ")");
    f.theta0 = g.angle_of(f.a);
    f.sweep = wrap_angle(g.angle_of(f.b) - f.theta0);
    if (f.sweep == 0.0) throw GeometryError("arc face with coincident endpoints");
    f.length = g.radius * std::abs(f.sweep);
    f.midpoint = f.point_at(0.5);
  }
}

inline void Mesh2D::compute_cell_metrics(Cell& c) const {
  // Exact area and first moments via boundary integrals; circular arcs get
  // closed-form trigonometric contributions.
  double area = 0.0, mx = 0.0, my = 0.0;
  const int m = static_cast<int>(c.faces.size());
  for (int i = 0; i < m; ++i) {
    const Face& f = faces_[c.faces[i]];
    const bool fwd = c.signs[i] > 0;  // cell traverses the face a -> b
    const Point2 pa = fwd ? f.a : f.b;
    const Point2 pb = fwd ? f.b : f.a;
    if (f.kind == FaceKind::Straight) {
      const double dx = pb.x() - pa.x(), dy = pb.y() - pa.y();
      area += dy * (pa.x() + 0.5 * dx);
      mx += 0.5 * dy * (pa.x() * pa.x() + pa.x() * dx + dx * dx / 3.0);
      my += -0.5 * dx * (pa.y() * pa.y() + pa.y() * dy + dy * dy / 3.0);
    } else {
      // boundary arcs have a single owner, so fwd always holds
      const double r = f.geom.radius, cx = f.geom.center.x(), cy = f.geom.center.y();
      const double t0 = f.theta0, t1 = f.theta0 + f.sweep, s = f.sweep;
      const double s0 = std::sin(t0), s1 = std::sin(t1);
      const double c0 = std::cos(t0), c1 = std::cos(t1);
      area += r * cx * (s1 - s0) + r * r * (0.5 * s + 0.25 * (std::sin(2 * t1) - std::sin(2 * t0)));
      mx += 0.5 * r *
            (cx * cx * (s1 - s0) + 2.0 * cx * r * (0.5 * s + 0.25 * (std::sin(2 * t1) - std::sin(2 * t0))) +
             r * r * ((s1 - s1 * s1 * s1 / 3.0) - (s0 - s0 * s0 * s0 / 3.0)));
      my += 0.5 * r *
            (cy * cy * (c0 - c1) + 2.0 * cy * r * (0.5 * s - 0.25 * (std::sin(2 * t1) - std::sin(2 * t0))) +
             r * r * ((-c1 + c1 * c1 * c1 / 3.0) - (-c0 + c0 * c0 * c0 / 3.0)));
    }
  }
  if (!(area > 0.0))
    throw TopologyError("cell " + std::to_string(c.id) +
                        " has nonpositive area (loop not counter-clockwise?)");
  c.area = area;
  c.centroid = Point2(mx / area, my / area);

  // diameter from loop vertices plus sampled points on each arc
  std::vector<Point2> pts;
  for (int v : c.vertices) pts.push_back(vertices_[v]);
  for (int fi : c.faces) {
    const Face& f = faces_[fi];
    if (f.kind != FaceKind::Arc) continue;
    for (int q = 1; q <= 8; ++q) pts.push_back(f.point_at(q / 9.0));
  }
  double h = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      h = std::max(h, (pts[i] - pts[j]).norm());
  c.h = h;
}

inline void Mesh2D::finalize() {
  faces_.clear();
  cells_.clear();
  n_interior_ = 0;

  for (const auto& p : vertices_)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw ParseError("non-finite vertex coordinate");

  const int nv = static_cast<int>(vertices_.size());
  cells_.resize(loops_.size());

  std::map<std::pair<int, int>, int> face_of_edge;
  std::vector<std::array<int, 2>> first_traversal;  // (va, vb) of first owner

  for (size_t ci = 0; ci < loops_.size(); ++ci) {
    const auto& loop = loops_[ci];
    Cell& cell = cells_[ci];
    cell.id = static_cast<int>(ci);
    cell.vertices = loop;
    const int m = static_cast<int>(loop.size());
    if (m < 3) throw TopologyError("cell " + std::to_string(ci) + " has fewer than 3 vertices");
    {
      auto sorted = loop;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw TopologyError("cell " + std::to_string(ci) + " vertex loop is not closed/simple");
    }
    for (int i = 0; i < m; ++i) {
      const int va = loop[i], vb = loop[(i + 1) % m];
      if (va < 0 || vb < 0 || va >= nv || vb >= nv)
        throw ParseError("vertex index out of range in cell " + std::to_string(ci));
      const auto key = edge_key(va, vb);
      auto it = face_of_edge.find(key);
      if (it == face_of_edge.end()) {
        Face f;
        f.id = static_cast<int>(faces_.size());
        f.v = {va, vb};
        f.owners = {cell.id, -1};
        if (auto ae = arc_edges_.find(key); ae != arc_edges_.end()) {
          f.kind = FaceKind::Arc;
          if (ae->second < 0 || ae->second >= static_cast<int>(geometries_.size()))
            throw ParseError("arc references unknown geometry");
          f.geom = geometries_[ae->second];
        }
        face_of_edge.emplace(key, f.id);
        first_traversal.push_back({va, vb});
        faces_.push_back(std::move(f));
        cell.faces.push_back(faces_.back().id);
        cell.signs.push_back(+1.0);
      } else {
        Face& f = faces_[it->second];
        if (f.owners[1] != -1)
          throw TopologyError("edge shared by more than two cells");
        if (first_traversal[f.id][0] != vb || first_traversal[f.id][1] != va)
          throw TopologyError("inconsistent cell orientations across a face");
        f.owners[1] = cell.id;
        cell.faces.push_back(f.id);
        cell.signs.push_back(-1.0);
      }
    }
  }

  // arc declarations must match an actual edge
  for (const auto& [key, geom] : arc_edges_)
    if (face_of_edge.find(key) == face_of_edge.end())
      throw TopologyError("arc declared on a dangling edge (" + std::to_string(key.first) +
                          "," + std::to_string(key.second) + ")");

  for (auto& f : faces_) {
    f.boundary = (f.owners[1] == -1);
    if (!f.boundary) ++n_interior_;
    if (!f.boundary && f.kind == FaceKind::Arc)
      throw TopologyError("interior faces must be straight (face " + std::to_string(f.id) + ")");
    compute_face_geometry(f);
  }

  for (auto& c : cells_) {
    compute_cell_metrics(c);
    c.on_boundary = false;
    for (int fi : c.faces) c.on_boundary |= faces_[fi].boundary;
  }
}

// ---------------------------------------------------------------------------
// builders and I/O

/// Uniform n x n mesh of the unit square.
inline Mesh2D build_rect_mesh(int n) {
  if (n < 1) throw GeometryError("build_rect_mesh requires n >= 1");
  std::vector<Point2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto vid = [n](int i, int j) { return i + j * (n + 1); };
  std::vector<std::vector<int>> loops;
  loops.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      loops.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  return Mesh2D(std::move(verts), std::move(loops));
}

namespace detail {

class TokenStream {
 public:
  explicit TokenStream(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }
  bool done() const { return pos_ >= tokens_.size(); }
  std::string next(const char* what) {
    if (done()) throw ParseError(std::string("unexpected end of file, expected ") + what);
    return tokens_[pos_++];
  }
  int next_int(const char* what) {
    const auto t = next(what);
    try {
      size_t used = 0;
      const int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("expected integer for ") + what + ", got '" + t + "'");
    }
  }
  double next_double(const char* what) {
    const auto t = next(what);
    try {
      size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("expected number for ") + what + ", got '" + t + "'");
    }
  }
 private:
  std::vector<std::string> tokens_;
  size_t pos_ = 0;
};

}  // namespace detail

/// Parse a mesh from the text format documented at the top of this header.
inline Mesh2D read_mesh(std::istream& in) {
  detail::TokenStream ts(in);
  std::vector<Point2> verts;
  std::vector<ArcGeometry> geoms;
  std::vector<std::vector<int>> loops;
  std::map<std::pair<int, int>, int> arcs;
  bool saw_vertices = false, saw_cells = false;

  while (!ts.done()) {
    const auto section = ts.next("section name");
    if (section == "vertices") {
      const int nv = ts.next_int("vertex count");
      for (int i = 0; i < nv; ++i) {
        const double x = ts.next_double("vertex x");
        const double y = ts.next_double("vertex y");
        verts.emplace_back(x, y);
      }
      saw_vertices = true;
    } else if (section == "geometries") {
      const int ng = ts.next_int("geometry count");
      for (int i = 0; i < ng; ++i) {
        const auto kind = ts.next("geometry kind");
        if (kind != "circle") throw ParseError("unknown geometry kind '" + kind + "'");
        ArcGeometry g;
        g.center.x() = ts.next_double("circle cx");
        g.center.y() = ts.next_double("circle cy");
        g.radius = ts.next_double("circle r");
        if (!(g.radius > 0.0)) throw ParseError("circle radius must be positive");
        geoms.push_back(g);
      }
    } else if (section == "cells") {
      const int nc = ts.next_int("cell count");
      for (int i = 0; i < nc; ++i) {
        const int m = ts.next_int("cell vertex count");
        if (m < 3) throw ParseError("cell with fewer than 3 vertices");
        std::vector<int> loop(m);
        for (int j = 0; j < m; ++j) loop[j] = ts.next_int("cell vertex id");
        loops.push_back(std::move(loop));
      }
      saw_cells = true;
    } else if (section == "arcs") {
      const int na = ts.next_int("arc count");
      for (int i = 0; i < na; ++i) {
        const int va = ts.next_int("arc vertex a");
        const int vb = ts.next_int("arc vertex b");
        const int gid = ts.next_int("arc geometry id");
        arcs[{std::min(va, vb), std::max(va, vb)}] = gid;
      }
    } else {
      throw ParseError("unknown section '" + section + "'");
    }
  }
  if (!saw_vertices || !saw_cells)
    throw ParseError("mesh file must contain 'vertices' and 'cells' sections");
  return Mesh2D(std::move(verts), std::move(loops), std::move(geoms), std::move(arcs));
}

inline Mesh2D load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

/// Write a mesh in the text format (17 significant digits, round-trip safe).
inline void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out.precision(17);
  out << "vertices " << mesh.vertices().size() << "\n";
  for (const auto& p : mesh.vertices()) out << p.x() << " " << p.y() << "\n";
  out << "geometries " << mesh.geometries().size() << "\n";
  for (const auto& g : mesh.geometries())
    out << "circle " << g.center.x() << " " << g.center.y() << " " << g.radius << "\n";
  out << "cells " << mesh.loops().size() << "\n";
  for (const auto& loop : mesh.loops()) {
    out << loop.size();
    for (int v : loop) out << " " << v;
    out << "\n";
  }
  out << "arcs " << mesh.arc_edges().size() << "\n";
  for (const auto& [key, gid] : mesh.arc_edges())
    out << key.first << " " << key.second << " " << gid << "\n";
}

inline void save_mesh(const std::string& path, const Mesh2D& mesh) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
}

/// Project every boundary vertex radially onto the unique circle within
/// `tol` and turn all boundary faces into arcs of the matched circles.
inline Mesh2D snap_boundary_to_arcs(const Mesh2D& mesh,
                                    const std::vector<ArcGeometry>& geoms,
                                    double tol) {
  auto verts = mesh.vertices();
  std::vector<int> vertex_geom(verts.size(), -1);

  for (const auto& f : mesh.faces()) {
    if (!f.boundary) continue;
    for (int v : f.v) {
      if (vertex_geom[v] == -1) {
        int match = -1;
        for (size_t g = 0; g < geoms.size(); ++g) {
          if (std::abs(geoms[g].signed_distance(verts[v])) <= tol) {
            if (match >= 0)
              throw GeometryError("boundary vertex " + std::to_string(v) +
                                  " matches more than one geometry within tol");
            match = static_cast<int>(g);
          }
        }
        if (match < 0)
          throw GeometryError("boundary vertex " + std::to_string(v) +
                              " has no geometry within tol");
        vertex_geom[v] = match;
        verts[v] = geoms[match].project(verts[v]);
      }
    }
  }

  std::map<std::pair<int, int>, int> arcs = mesh.arc_edges();
  for (const auto& f : mesh.faces()) {
    if (!f.boundary) continue;
    const int ga = vertex_geom[f.v[0]], gb = vertex_geom[f.v[1]];
    if (ga != gb)
      throw GeometryError("boundary face " + std::to_string(f.id) +
                          " endpoints lie on different geometries");
    arcs[{std::min(f.v[0], f.v[1]), std::max(f.v[0], f.v[1])}] = ga;
  }
  return Mesh2D(std::move(verts), mesh.loops(), geoms, std::move(arcs));
}

}  // namespace hho2d
