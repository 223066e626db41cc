// Quadrature on polytopal cells (fan sub-triangulation, curved sectors along
// arc faces) and on straight/arc faces (Gauss rules in arc length / angle).

#pragma once

#include <mutex>
#include <unordered_map>

#include "hho2d/mesh.hpp"

namespace hho2d {

struct QuadRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
  Point2 point(int i) const { return points.row(i).transpose(); }
};

/// Face rule: parameters s in [0,1], physical points, measure weights and
/// the fixed normal n_F evaluated at each node (varies along arcs).
struct FaceQuadRule {
  Eigen::VectorXd s;
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  Eigen::Matrix<double, Eigen::Dynamic, 2> normals;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
  Point2 point(int i) const { return points.row(i).transpose(); }
  Point2 normal(int i) const { return normals.row(i).transpose(); }
  Point2 tangent(int i) const { return rot90_ccw(normal(i)); }
};

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [0,1], cached per node count

namespace detail {

inline const std::pair<Eigen::VectorXd, Eigen::VectorXd>& gauss01(int n) {
  static std::unordered_map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Eigen::VectorXd x(n), w(n);
  auto legendre = [n](double t) {  // returns (P_n(t), P_n'(t))
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    return std::make_pair(p0, n * (t * p0 - p1) / (t * t - 1.0));
  };
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-based initial guess
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 60; ++iter) {
      const auto [p, dp] = legendre(t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    const auto [p, dp] = legendre(t);
    (void)p;
    x(i) = 0.5 * (1.0 - t);  // map [-1,1] -> [0,1], descending t -> ascending x
    w(i) = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  auto [pos, ok] = cache.emplace(n, std::make_pair(std::move(x), std::move(w)));
  return pos->second;
}

inline int gauss_count(int degree) { return degree / 2 + 1; }

}  // namespace detail

// ---------------------------------------------------------------------------
// face quadrature

/// Gauss rule on a face, exact to `degree` for polynomials in arc length on
/// straight faces; arcs use the angle parameter with extra nodes to resolve
/// the trigonometric integrands.
inline FaceQuadRule face_quadrature(const Face& face, int degree) {
  FaceQuadRule rule;
  rule.exactness = degree;
  const int n = face.kind == FaceKind::Straight ? detail::gauss_count(degree)
                                                : (degree + 6 + 1) / 2;
  const auto& [xs, ws] = detail::gauss01(n);
  rule.s = xs;
  rule.points.resize(n, 2);
  rule.normals.resize(n, 2);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.points.row(i) = face.point_at(xs(i)).transpose();
    rule.normals.row(i) = face.normal_at(xs(i)).transpose();
    rule.weights(i) = ws(i) * face.length;
  }
  return rule;
}

// ---------------------------------------------------------------------------
// cell quadrature

namespace detail {

/// Append a collapsed tensor Gauss rule on the triangle (p0,p1,p2).
inline void append_triangle_rule(const Point2& p0, const Point2& p1, const Point2& p2,
                                 int degree, std::vector<Point2>& pts,
                                 std::vector<double>& wts) {
  const double area2 = cross2(p1 - p0, p2 - p0);  // twice the signed area
  if (!(area2 > 0.0))
    throw GeometryError("sub-triangle with nonpositive area in cell quadrature");
  const int nu = (degree + 2 + 1) / 2;  // Jacobian raises the u-degree by one
  const int nv = (degree + 1 + 1) / 2;
  const auto& [xu, wu] = gauss01(nu);
  const auto& [xv, wv] = gauss01(nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double l1 = xu(i);
      const double l2 = xv(j) * (1.0 - xu(i));
      pts.push_back(p0 + l1 * (p1 - p0) + l2 * (p2 - p0));
      wts.push_back(wu(i) * wv(j) * (1.0 - xu(i)) * area2);
    }
}

/// Append a rule on the curved sector spanned by apex p and the arc piece
/// theta in [t0, t0+ds] of the face's circle; exact geometry, Gauss in both
/// the radial and the angular direction.
inline void append_sector_rule(const Point2& apex, const ArcGeometry& g, double t0,
                               double ds, int degree, std::vector<Point2>& pts,
                               std::vector<double>& wts) {
  const int nu = (degree + 2 + 1) / 2;
  const int nt = (degree + 6 + 1) / 2;
  const auto& [xu, wu] = gauss01(nu);
  const auto& [xt, wt] = gauss01(nt);
  for (int j = 0; j < nt; ++j) {
    const double th = t0 + xt(j) * ds;
    const Point2 q = g.at_angle(th);
    const Point2 dq = g.radius * Point2(-std::sin(th), std::cos(th));
    const double jac_t = cross2(q - apex, dq) * ds;  // positive when apex is interior
    if (!(jac_t > 0.0))
      throw GeometryError("curved sector folds over its apex in cell quadrature");
    for (int i = 0; i < nu; ++i) {
      const double u = xu(i);
      pts.push_back(apex + u * (q - apex));
      wts.push_back(wu(i) * wt(j) * u * jac_t);
    }
  }
}

/// Star decomposition by ear clipping (straight-edged cells only); returns
/// triangles as vertex-index triples into `poly`.
inline std::vector<std::array<int, 3>> ear_clip(const std::vector<Point2>& poly) {
  const int n = static_cast<int>(poly.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::array<int, 3>> tris;
  auto is_ear = [&](int a, int b, int c) {
    const Point2 &pa = poly[a], &pb = poly[b], &pc = poly[c];
    if (cross2(pb - pa, pc - pa) <= 0.0) return false;
    for (int v : idx) {
      if (v == a || v == b || v == c) continue;
      // barycentric point-in-triangle test
      const double d = cross2(pb - pa, pc - pa);
      const double l1 = cross2(poly[v] - pa, pc - pa) / d;
      const double l2 = cross2(pb - pa, poly[v] - pa) / d;
      if (l1 > 0.0 && l2 > 0.0 && l1 + l2 < 1.0) return false;
    }
    return true;
  };
  while (idx.size() > 3) {
    bool clipped = false;
    for (size_t i = 0; i < idx.size(); ++i) {
      const int a = idx[(i + idx.size() - 1) % idx.size()];
      const int b = idx[i];
      const int c = idx[(i + 1) % idx.size()];
      if (is_ear(a, b, c)) {
        tris.push_back({a, b, c});
        idx.erase(idx.begin() + i);
        clipped = true;
        break;
      }
    }
    if (!clipped) throw GeometryError("ear clipping failed (degenerate polygon)");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

}  // namespace detail

/// Quadrature exact to `degree` for bivariate polynomials on the cell.
/// The cell is fanned from its centroid; each arc face is split into
/// `n_subedges` angular pieces handled as exact curved sectors. If a fan
/// triangle is inverted the cell is re-decomposed by ear clipping.
inline QuadRule cell_quadrature(const Mesh2D& mesh, const Cell& cell, int degree,
                                int n_subedges = 30) {
  if (degree < 0 || n_subedges < 1)
    throw GeometryError("cell_quadrature needs degree >= 0 and n_subedges >= 1");
  std::vector<Point2> pts;
  std::vector<double> wts;

  auto fan_from = [&](const Point2& apex) {
    pts.clear();
    wts.clear();
    const int m = static_cast<int>(cell.faces.size());
    for (int i = 0; i < m; ++i) {
      const Face& f = mesh.face(cell.faces[i]);
      const bool fwd = cell.signs[i] > 0;
      if (f.kind == FaceKind::Straight) {
        const Point2 pa = fwd ? f.a : f.b;
        const Point2 pb = fwd ? f.b : f.a;
        detail::append_triangle_rule(apex, pa, pb, degree, pts, wts);
      } else {
        const double ds = f.sweep / n_subedges;  // boundary arcs: fwd always
        for (int q = 0; q < n_subedges; ++q)
          detail::append_sector_rule(apex, f.geom, f.theta0 + q * ds, ds, degree,
                                     pts, wts);
      }
    }
  };

  try {
    fan_from(cell.centroid);
  } catch (const GeometryError&) {
    bool has_arc = false;
    for (int fi : cell.faces) has_arc |= mesh.face(fi).kind == FaceKind::Arc;
    if (has_arc) throw;  // no ear-clip fallback on curved cells
    std::vector<Point2> poly;
    for (int v : cell.vertices) poly.push_back(mesh.vertices()[v]);
    pts.clear();
    wts.clear();
    for (const auto& t : detail::ear_clip(poly))
      detail::append_triangle_rule(poly[t[0]], poly[t[1]], poly[t[2]], degree, pts, wts);
  }

  QuadRule rule;
  rule.exactness = degree;
  rule.points.resize(pts.size(), 2);
  rule.weights.resize(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    rule.points.row(i) = pts[i].transpose();
    rule.weights(i) = wts[i];
  }
  return rule;
}

}  // namespace hho2d
