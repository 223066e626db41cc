// Scaled monomial bases on cells and faces, derivative tables up to fourth
// order, mass matrices and L2-orthogonal projections.

#pragma once

#include <functional>
#include <optional>

#include "hho2d/quadrature.hpp"

namespace hho2d {

/// Values of all basis functions and their partial derivatives at a set of
/// points. d(p,q) is the (n_points x n_funcs) table of d^{p+q}/dx^p dy^q.
class DerivTables {
 public:
  static constexpr int max_order = 4;
  static constexpr int index(int p, int q) {
    const int o = p + q;
    return o * (o + 1) / 2 + q;
  }
  static constexpr int table_count(int order) {
    return (order + 1) * (order + 2) / 2;
  }

  DerivTables() = default;
  DerivTables(int order, int n_points, int n_funcs) : order_(order) {
    tables_.resize(table_count(order));
    for (auto& t : tables_) t.setZero(n_points, n_funcs);
  }

  int order() const { return order_; }
  const Eigen::MatrixXd& d(int p, int q) const { return tables_[index(p, q)]; }
  Eigen::MatrixXd& d(int p, int q) { return tables_[index(p, q)]; }

  const Eigen::MatrixXd& values() const { return d(0, 0); }

 private:
  int order_ = 0;
  std::vector<Eigen::MatrixXd> tables_;
};

/// Monomials ((x-xc)/h)^a ((y-yc)/h)^b with a+b <= degree, optionally
/// recombined by a change-of-basis matrix (for Gram orthonormalization).
class CellBasis {
 public:
  CellBasis(int degree, Point2 center, double h)
      : degree_(degree), center_(center), h_(h) {
    if (degree < 0 || !(h > 0.0)) throw GeometryError("invalid cell basis parameters");
    for (int o = 0; o <= degree; ++o)
      for (int b = 0; b <= o; ++b) exponents_.push_back({o - b, b});
  }
  CellBasis(int degree, const Cell& cell) : CellBasis(degree, cell.centroid, cell.h) {}

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  Point2 center() const { return center_; }
  double scale() const { return h_; }
  bool has_transform() const { return transform_.has_value(); }

  /// Derivative tables at `points`, exact up to order max_deriv (<= 4).
  DerivTables eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                   int max_deriv) const {
    if (max_deriv < 0 || max_deriv > DerivTables::max_order)
      throw Error("cell basis derivatives supported up to order 4");
    const int np = static_cast<int>(points.rows());
    const int nf = size();
    DerivTables tabs(max_deriv, np, nf);

    // powers of the scaled coordinates, then analytic monomial derivatives
    Eigen::MatrixXd px(np, degree_ + 1), py(np, degree_ + 1);
    px.col(0).setOnes();
    py.col(0).setOnes();
    for (int i = 0; i < np; ++i) {
      const double X = (points(i, 0) - center_.x()) / h_;
      const double Y = (points(i, 1) - center_.y()) / h_;
      for (int o = 1; o <= degree_; ++o) {
        px(i, o) = px(i, o - 1) * X;
        py(i, o) = py(i, o - 1) * Y;
      }
    }
    auto falling = [](int a, int p) {  // a!/(a-p)!
      double r = 1.0;
      for (int j = 0; j < p; ++j) r *= (a - j);
      return r;
    };
    for (int p = 0; p <= max_deriv; ++p)
      for (int q = 0; p + q <= max_deriv; ++q) {
        auto& tab = tabs.d(p, q);
        const double hs = std::pow(h_, -(p + q));
        for (int j = 0; j < nf; ++j) {
          const auto [a, b] = exponents_[j];
          if (a < p || b < q) continue;  // table is zero-initialized
          const double coef = falling(a, p) * falling(b, q) * hs;
          tab.col(j) = coef * px.col(a - p).cwiseProduct(py.col(b - q));
        }
        if (transform_) tab = tab * transform_->transpose();
      }
    return tabs;
  }

  /// Basis recombined so that its mass matrix under `quad` is the identity.
  CellBasis orthonormalized(const QuadRule& quad) const;

 private:
  int degree_;
  Point2 center_;
  double h_;
  std::vector<std::array<int, 2>> exponents_;
  std::optional<Eigen::MatrixXd> transform_;  // effective basis = T * monomials
};

/// 1D polynomials on a straight face in the arc-length coordinate centered at
/// the face midpoint and scaled by the face length (so the parameter runs
/// over [-1/2, 1/2]).
class FaceBasis {
 public:
  FaceBasis(int degree, const Face& face) : degree_(degree), length_(face.length) {
    if (degree < 0) throw Error("invalid face basis degree");
    if (face.kind == FaceKind::Arc)
      throw Error("face bases are defined on straight faces only");
  }

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  /// Values at parameters s in [0,1]; optionally the arc-length derivative.
  void eval(const Eigen::VectorXd& s, Eigen::MatrixXd& vals,
            Eigen::MatrixXd* darc = nullptr) const {
    const int np = static_cast<int>(s.size());
    vals.resize(np, size());
    if (darc) darc->setZero(np, size());
    for (int i = 0; i < np; ++i) {
      const double tau = s(i) - 0.5;
      double pw = 1.0;
      for (int m = 0; m <= degree_; ++m) {
        vals(i, m) = pw;
        if (darc && m + 1 <= degree_) (*darc)(i, m + 1) = (m + 1) * pw / length_;
        pw *= tau;
      }
    }
  }

 private:
  int degree_;
  double length_;
};

// ---------------------------------------------------------------------------
// mass matrices and projections

/// M_ij = int_K phi_i phi_j under `quad`; throws ConditioningError when the
/// matrix is numerically rank-deficient.
inline Eigen::MatrixXd cell_mass_matrix(const CellBasis& basis, const QuadRule& quad) {
  const auto tabs = basis.eval(quad.points, 0);
  const Eigen::MatrixXd& V = tabs.values();
  Eigen::MatrixXd M = V.transpose() * quad.weights.asDiagonal() * V;
  M = 0.5 * (M + M.transpose().eval());
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("cell mass matrix is numerically singular");
  return M;
}

inline CellBasis CellBasis::orthonormalized(const QuadRule& quad) const {
  if (transform_) throw Error("basis is already orthonormalized");
  const Eigen::MatrixXd M = cell_mass_matrix(*this, quad);
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  // T = L^{-1} gives T M T^T = I
  CellBasis out(*this);
  out.transform_ = Eigen::MatrixXd(
      llt.matrixL().solve(Eigen::MatrixXd::Identity(size(), size())));
  return out;
}

/// L2-orthogonal projection of a scalar field onto the span of `basis`.
inline Eigen::VectorXd project_cell(const std::function<double(Point2)>& v,
                                    const CellBasis& basis, const QuadRule& quad) {
  const auto tabs = basis.eval(quad.points, 0);
  const Eigen::MatrixXd& V = tabs.values();
  Eigen::VectorXd fv(quad.size());
  for (int i = 0; i < quad.size(); ++i) fv(i) = v(quad.point(i));
  const Eigen::MatrixXd M = V.transpose() * quad.weights.asDiagonal() * V;
  const Eigen::VectorXd b = V.transpose() * quad.weights.cwiseProduct(fv);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("projection mass matrix is numerically singular");
  return llt.solve(b);
}

/// 1D L2 projection on a straight face; `v` takes the parameter s in [0,1].
inline Eigen::VectorXd project_face(const std::function<double(double)>& v, int degree,
                                    const Face& face, int quad_degree = -1) {
  if (face.kind == FaceKind::Arc)
    throw Error("project_face: boundary arcs carry no polynomial unknowns");
  if (quad_degree < 0) quad_degree = 2 * degree + 2;
  const FaceQuadRule fq = face_quadrature(face, quad_degree);
  const FaceBasis fb(degree, face);
  Eigen::MatrixXd V;
  fb.eval(fq.s, V);
  Eigen::VectorXd fv(fq.size());
  for (int i = 0; i < fq.size(); ++i) fv(i) = v(fq.s(i));
  const Eigen::MatrixXd M = V.transpose() * fq.weights.asDiagonal() * V;
  const Eigen::VectorXd b = V.transpose() * fq.weights.cwiseProduct(fv);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("face mass matrix is numerically singular");
  return llt.solve(b);
}

}  // namespace hho2d
