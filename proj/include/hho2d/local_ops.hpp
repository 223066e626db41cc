// Per-cell HHO ingredients for eps*biharmonic - laplacian: the local space
// P^{k+2}(K) x P^{k+2}(F_int) x P^k(F_int), the reconstruction operator, the
// interior/boundary (Nitsche) stabilizations, the lifting driven by boundary
// data, the reduction operator and the local load vector.

#pragma once

#include <functional>

#include "hho2d/basis.hpp"

namespace hho2d {

/// Regime weight max{1, eps h^-2} selecting the dominant operator scaling.
inline double sigma_K(double eps, double h_K) {
  if (!(h_K > 0.0)) throw GeometryError("sigma_K requires h_K > 0");
  return std::max(1.0, eps / (h_K * h_K));
}

/// Dirichlet/Neumann data evaluated on boundary faces. dt_gD is the
/// tangential derivative of g_D along the supplied unit tangent; g_N is the
/// (eps-scaled) normal derivative datum along the supplied unit normal.
struct BoundaryData {
  std::function<double(Point2)> g_D;
  std::function<double(Point2, Point2)> g_N;    // (point, n)
  std::function<double(Point2, Point2)> dt_gD;  // (point, t)

  static BoundaryData zero() {
    return {[](Point2) { return 0.0; }, [](Point2, Point2) { return 0.0; },
            [](Point2, Point2) { return 0.0; }};
  }
};

struct LocalOptions {
  int n_subedges = 30;        // angular pieces per arc face in cell rules
  int quad_boost = 0;         // extra quadrature exactness
  bool hp_scaling = false;    // h^-1 penalty weights scaled by (k+1)^2
  bool hp_symmetric = false;  // additionally scale the h-weighted term by (k+1)^-2
  bool pure_second_order = false;  // drop every eps-scaled block (Poisson oracle)
  bool orthonormalize_basis = false;
  bool test_flip_gamma_sign = false;  // fault-injection hook for the check suites
};

/// Local unknown layout: the cell block then, per interior face of the cell,
/// a trace block P^{k+2}(F) and a normal-derivative block P^k(F). Boundary
/// faces carry no unknowns. Normal-derivative dofs are stored in the n_F
/// orientation; the signs s_{K,F} are baked into the local matrices.
struct LocalDofLayout {
  int k = 0;
  int n_cell = 0;
  int n_trace = 0;  // k+3 per face
  int n_gamma = 0;  // k+1 per face
  std::vector<int> face_ids;    // interior faces, cell loop order
  std::vector<double> signs;    // s_{K,F} for those faces
  int total = 0;

  int n_faces() const { return static_cast<int>(face_ids.size()); }
  int trace_offset(int i) const { return n_cell + i * (n_trace + n_gamma); }
  int gamma_offset(int i) const { return trace_offset(i) + n_trace; }
};

/// All per-cell operators; A = R^T G_eps R + Si + Sb.
struct LocalOperatorSet {
  LocalDofLayout layout;
  Eigen::MatrixXd R;   // (dim P^{k+2}) x total, reconstruction coefficients
  Eigen::MatrixXd Si;  // total x total, interior stabilization
  Eigen::MatrixXd Sb;  // total x total (cell block only), boundary penalty
  Eigen::MatrixXd A;   // total x total, local stiffness
  double eps = 0.0, sigma = 1.0, h_K = 0.0;
};

/// Builds every local operator for one cell; quadratures and basis tables
/// are computed once in the constructor and shared by all products.
class LocalAssembler {
 public:
  LocalAssembler(const Mesh2D& mesh, int cell_id, int k, double eps,
                 LocalOptions opt = {})
      : mesh_(mesh),
        cell_(mesh.cell(cell_id)),
        k_(k),
        eps_(opt.pure_second_order ? 0.0 : eps),
        opt_(opt),
        basis_(k + 2, mesh.cell(cell_id)) {
    if (k < 0) throw Error("polynomial degree k must be nonnegative");
    if (eps < 0.0) throw Error("eps must be nonnegative");
    sigma_ = sigma_K(eps_, cell_.h);

    const int qdeg = 2 * (k + 2) + 2 + opt.quad_boost;
    cell_quad_ = cell_quadrature(mesh_, cell_, qdeg, opt.n_subedges);
    if (opt.orthonormalize_basis) basis_ = basis_.orthonormalized(cell_quad_);
    cell_tabs_ = basis_.eval(cell_quad_.points, 2);

    const int N = basis_.size();
    const auto& W = cell_quad_.weights;
    const auto& t = cell_tabs_;
    grad_gram_ = t.d(1, 0).transpose() * W.asDiagonal() * t.d(1, 0) +
                 t.d(0, 1).transpose() * W.asDiagonal() * t.d(0, 1);
    hess_gram_ = t.d(2, 0).transpose() * W.asDiagonal() * t.d(2, 0) +
                 2.0 * (t.d(1, 1).transpose() * W.asDiagonal() * t.d(1, 1)) +
                 t.d(0, 2).transpose() * W.asDiagonal() * t.d(0, 2);
    geps_ = grad_gram_;
    if (use_eps()) geps_ += eps_ * hess_gram_;
    mean_ = t.values().transpose() * W;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(N + 1, N + 1);
    kkt.topLeftCorner(N, N) = geps_;
    kkt.topRightCorner(N, 1) = mean_;
    kkt.bottomLeftCorner(1, N) = mean_.transpose();
    kkt_.compute(kkt);

    // dof layout and per-face data
    layout_.k = k;
    layout_.n_cell = N;
    layout_.n_trace = k + 3;
    layout_.n_gamma = k + 1;
    const int fdeg = 2 * (k + 2) + 2 + opt.quad_boost;
    for (size_t i = 0; i < cell_.faces.size(); ++i) {
      const Face& f = mesh_.face(cell_.faces[i]);
      FaceData fd;
      fd.face = &f;
      fd.sign = cell_.signs[i];
      fd.quad = face_quadrature(f, fdeg);
      fd.tabs = basis_.eval(fd.quad.points, 3);
      const int nq = fd.quad.size();
      fd.nK.resize(nq, 2);
      fd.tg.resize(nq, 2);
      for (int q = 0; q < nq; ++q) {
        fd.nK.row(q) = fd.sign * fd.quad.normals.row(q);
        fd.tg.row(q) = rot90_ccw(fd.quad.normal(q)).transpose();
      }
      build_contractions(fd);
      if (!f.boundary) {
        double s = fd.sign;
        if (opt_.test_flip_gamma_sign) s = -s;
        layout_.face_ids.push_back(f.id);
        layout_.signs.push_back(s);
        const FaceBasis tb(k + 2, f);
        const FaceBasis gb(k, f);
        tb.eval(fd.quad.s, fd.trace_vals, &fd.trace_darc);
        gb.eval(fd.quad.s, fd.gamma_vals, nullptr);
        fd.dof_index = static_cast<int>(layout_.face_ids.size()) - 1;
      }
      faces_.push_back(std::move(fd));
    }
    layout_.total = N + layout_.n_faces() * (layout_.n_trace + layout_.n_gamma);
  }

  const LocalDofLayout& layout() const { return layout_; }
  const CellBasis& cell_basis() const { return basis_; }
  const QuadRule& cell_rule() const { return cell_quad_; }
  const Eigen::MatrixXd& eps_gram() const { return geps_; }
  double sigma() const { return sigma_; }
  double h() const { return cell_.h; }
  double eps() const { return eps_; }
  const Cell& cell() const { return cell_; }

  /// Reconstruction matrix from the integrated-by-parts formulation
  /// (third-order face derivatives, no cell derivatives beyond order two).
  Eigen::MatrixXd reconstruction() const {
    const int N = basis_.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, layout_.total);
    B.leftCols(N) = geps_;
    for (const auto& fd : faces_) {
      const auto& W = fd.quad.weights;
      const Eigen::MatrixXd& phi = fd.tabs.values();
      B.leftCols(N) -= fd.Dn.transpose() * W.asDiagonal() * phi;
      if (use_eps()) {
        B.leftCols(N) += eps_ * (fd.DnL.transpose() * W.asDiagonal() * phi -
                                 fd.Dnn.transpose() * W.asDiagonal() * fd.Dn -
                                 fd.Dnt.transpose() * W.asDiagonal() * fd.Dt);
      }
      if (fd.dof_index < 0) continue;
      const int to = layout_.trace_offset(fd.dof_index);
      const int go = layout_.gamma_offset(fd.dof_index);
      B.middleCols(to, layout_.n_trace) +=
          fd.Dn.transpose() * W.asDiagonal() * fd.trace_vals;
      if (use_eps()) {
        B.middleCols(to, layout_.n_trace) +=
            eps_ * (fd.Dnt.transpose() * W.asDiagonal() * fd.trace_darc -
                    fd.DnL.transpose() * W.asDiagonal() * fd.trace_vals);
        B.middleCols(go, layout_.n_gamma) += (eps_ * layout_.signs[fd.dof_index]) *
                                             (fd.Dnn.transpose() * W.asDiagonal() *
                                              fd.gamma_vals);
      }
    }
    return solve_mean_constrained(B, /*cell_mean=*/true);
  }

  /// Reconstruction matrix from the primal formulation (fourth-order cell
  /// derivatives); equals reconstruction() and is kept as a cross-check.
  Eigen::MatrixXd reconstruction_dual() const {
    const int N = basis_.size();
    const auto t4 = basis_.eval(cell_quad_.points, 4);
    const auto& W = cell_quad_.weights;
    const Eigen::MatrixXd lap = t4.d(2, 0) + t4.d(0, 2);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, layout_.total);
    // rows test w, columns trial v: B_ij = (phi_j, eps bilap phi_i - lap phi_i)_K
    B.leftCols(N) = -lap.transpose() * W.asDiagonal() * t4.values();
    if (use_eps()) {
      const Eigen::MatrixXd bilap = t4.d(4, 0) + 2.0 * t4.d(2, 2) + t4.d(0, 4);
      B.leftCols(N) += eps_ * (bilap.transpose() * W.asDiagonal() * t4.values());
    }
    for (const auto& fd : faces_) {
      if (fd.dof_index < 0) continue;
      const auto& Wf = fd.quad.weights;
      const int to = layout_.trace_offset(fd.dof_index);
      const int go = layout_.gamma_offset(fd.dof_index);
      B.middleCols(to, layout_.n_trace) +=
          fd.Dn.transpose() * Wf.asDiagonal() * fd.trace_vals;
      if (use_eps()) {
        B.middleCols(to, layout_.n_trace) +=
            eps_ * (fd.Dnt.transpose() * Wf.asDiagonal() * fd.trace_darc -
                    fd.DnL.transpose() * Wf.asDiagonal() * fd.trace_vals);
        B.middleCols(go, layout_.n_gamma) += (eps_ * layout_.signs[fd.dof_index]) *
                                             (fd.Dnn.transpose() * Wf.asDiagonal() *
                                              fd.gamma_vals);
      }
    }
    return solve_mean_constrained(B, true);
  }

  /// S^i: sigma/h penalty on the trace jump plus sigma*h penalty on the
  /// P^k-projected normal-derivative mismatch, interior faces only.
  Eigen::MatrixXd stab_interior() const {
    Eigen::MatrixXd Si = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
    const int N = basis_.size();
    const double pen1 = hp_factor();
    const double pen2 = (opt_.hp_scaling && opt_.hp_symmetric)
                            ? 1.0 / ((k_ + 1.0) * (k_ + 1.0))
                            : 1.0;
    for (const auto& fd : faces_) {
      if (fd.dof_index < 0) continue;
      const auto& W = fd.quad.weights;
      const int nq = fd.quad.size();
      const int to = layout_.trace_offset(fd.dof_index);
      const int go = layout_.gamma_offset(fd.dof_index);
      const double s = layout_.signs[fd.dof_index];

      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nq, layout_.total);
      E.leftCols(N) = -fd.tabs.values();
      E.middleCols(to, layout_.n_trace) = fd.trace_vals;
      Si += (sigma_ * pen1 / cell_.h) * (E.transpose() * W.asDiagonal() * E);

      const Eigen::MatrixXd Mk =
          fd.gamma_vals.transpose() * W.asDiagonal() * fd.gamma_vals;
      Eigen::MatrixXd N2 = Eigen::MatrixXd::Zero(layout_.n_gamma, layout_.total);
      N2.middleCols(go, layout_.n_gamma) = s * Mk;
      N2.leftCols(N) = -(fd.gamma_vals.transpose() * W.asDiagonal() * fd.Dn);
      const Eigen::LLT<Eigen::MatrixXd> llt(Mk);
      if (llt.info() != Eigen::Success)
        throw ConditioningError("face P^k mass matrix singular in stabilization");
      const Eigen::MatrixXd D2 = llt.solve(N2);
      Si += (sigma_ * cell_.h * pen2) * (D2.transpose() * Mk * D2);
    }
    return Si;
  }

  /// S^b: Nitsche penalty on boundary faces (cell dofs only); zero matrix on
  /// interior cells.
  Eigen::MatrixXd stab_boundary() const {
    Eigen::MatrixXd Sb = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
    const int N = basis_.size();
    const double pen1 = hp_factor();
    for (const auto& fd : faces_) {
      if (!fd.face->boundary) continue;
      const auto& W = fd.quad.weights;
      const Eigen::MatrixXd& phi = fd.tabs.values();
      Sb.topLeftCorner(N, N) +=
          (sigma_ * pen1 / cell_.h) * (phi.transpose() * W.asDiagonal() * phi);
      if (use_eps())
        Sb.topLeftCorner(N, N) +=
            (eps_ * pen1 / cell_.h) *
            (fd.tabs.d(1, 0).transpose() * W.asDiagonal() * fd.tabs.d(1, 0) +
             fd.tabs.d(0, 1).transpose() * W.asDiagonal() * fd.tabs.d(0, 1));
    }
    return Sb;
  }

  /// Full local operator set with A = R^T G_eps R + S^i + S^b.
  LocalOperatorSet build() const {
    LocalOperatorSet ops;
    ops.layout = layout_;
    ops.R = reconstruction();
    ops.Si = stab_interior();
    ops.Sb = stab_boundary();
    ops.A = ops.R.transpose() * geps_ * ops.R + ops.Si + ops.Sb;
    ops.A = 0.5 * (ops.A + ops.A.transpose().eval());
    ops.eps = eps_;
    ops.sigma = sigma_;
    ops.h_K = cell_.h;
    return ops;
  }

  /// Lifting polynomial driven by the boundary data; zero on interior cells.
  Eigen::VectorXd lifting(const BoundaryData& bd) const {
    const int N = basis_.size();
    if (!cell_.on_boundary) return Eigen::VectorXd::Zero(N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    for (const auto& fd : faces_) {
      if (!fd.face->boundary) continue;
      const int nq = fd.quad.size();
      Eigen::VectorXd gd(nq), gn(nq), dgd(nq);
      for (int q = 0; q < nq; ++q) {
        const Point2 p = fd.quad.point(q);
        gd(q) = bd.g_D(p);
        gn(q) = bd.g_N(p, fd.quad.normal(q));
        dgd(q) = bd.dt_gD(p, fd.quad.tangent(q));
      }
      const auto& W = fd.quad.weights;
      rhs += fd.Dn.transpose() * W.cwiseProduct(gd);
      if (use_eps())
        rhs += eps_ * (fd.Dnn.transpose() * W.cwiseProduct(gn) +
                       fd.Dnt.transpose() * W.cwiseProduct(dgd) -
                       fd.DnL.transpose() * W.cwiseProduct(gd));
    }
    Eigen::VectorXd aug(N + 1);
    aug.head(N) = rhs;
    aug(N) = 0.0;  // zero mean
    return kkt_.solve(aug).head(N);
  }

  /// Reduction of (u, grad u): cell and trace L2 projections plus P^k
  /// projections of n_F . grad u on the interior faces. Uses rules finer
  /// than the assembly ones since u is generally not polynomial.
  Eigen::VectorXd reduce(const std::function<double(Point2)>& u,
                         const std::function<Point2(Point2)>& grad_u) const {
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(layout_.total);
    const QuadRule q =
        cell_quadrature(mesh_, cell_, 2 * (k_ + 2) + 6, opt_.n_subedges);
    const auto tabs = basis_.eval(q.points, 0);
    const auto& W = q.weights;
    Eigen::VectorXd uv(q.size());
    for (int i = 0; i < q.size(); ++i) uv(i) = u(q.point(i));
    const Eigen::MatrixXd M =
        tabs.values().transpose() * W.asDiagonal() * tabs.values();
    dofs.head(basis_.size()) = Eigen::LLT<Eigen::MatrixXd>(M).solve(
        tabs.values().transpose() * W.cwiseProduct(uv));
    for (const auto& fd : faces_) {
      if (fd.dof_index < 0) continue;
      const Face& face = *fd.face;
      const FaceQuadRule fq = face_quadrature(face, 2 * (k_ + 2) + 10);
      Eigen::MatrixXd tv, gv;
      FaceBasis(k_ + 2, face).eval(fq.s, tv);
      FaceBasis(k_, face).eval(fq.s, gv);
      const auto& Wf = fq.weights;
      Eigen::VectorXd uf(fq.size()), gf(fq.size());
      for (int i = 0; i < fq.size(); ++i) {
        const Point2 p = fq.point(i);
        uf(i) = u(p);
        gf(i) = grad_u(p).dot(fq.normal(i));  // n_F orientation
      }
      const Eigen::MatrixXd Mt = tv.transpose() * Wf.asDiagonal() * tv;
      dofs.segment(layout_.trace_offset(fd.dof_index), layout_.n_trace) =
          Eigen::LLT<Eigen::MatrixXd>(Mt).solve(tv.transpose() * Wf.cwiseProduct(uf));
      const Eigen::MatrixXd Mg = gv.transpose() * Wf.asDiagonal() * gv;
      dofs.segment(layout_.gamma_offset(fd.dof_index), layout_.n_gamma) =
          Eigen::LLT<Eigen::MatrixXd>(Mg).solve(gv.transpose() * Wf.cwiseProduct(gf));
    }
    return dofs;
  }

  /// Local load vector: (f, w_K)_K plus the Nitsche boundary-data terms, the
  /// reconstruction-coupled ones composed through R.
  Eigen::VectorXd load(const std::function<double(Point2)>& f,
                       const BoundaryData& bd, const Eigen::MatrixXd& R) const {
    const int N = basis_.size();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(layout_.total);
    const auto& W = cell_quad_.weights;
    Eigen::VectorXd fv(cell_quad_.size());
    for (int q = 0; q < cell_quad_.size(); ++q) fv(q) = f(cell_quad_.point(q));
    b.head(N) = cell_tabs_.values().transpose() * W.cwiseProduct(fv);

    if (!cell_.on_boundary) return b;
    const double pen1 = hp_factor();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
    for (const auto& fd : faces_) {
      if (!fd.face->boundary) continue;
      const int nq = fd.quad.size();
      const auto& Wf = fd.quad.weights;
      Eigen::VectorXd gd(nq), gn(nq), dgd(nq);
      for (int q = 0; q < nq; ++q) {
        const Point2 p = fd.quad.point(q);
        gd(q) = bd.g_D(p);
        gn(q) = bd.g_N(p, fd.quad.normal(q));
        dgd(q) = bd.dt_gD(p, fd.quad.tangent(q));
      }
      b.head(N) += (sigma_ * pen1 / cell_.h) *
                   (fd.tabs.values().transpose() * Wf.cwiseProduct(gd));
      c -= fd.Dn.transpose() * Wf.cwiseProduct(gd);
      if (use_eps()) {
        // eps (g_N n + dt g_D t, h^-1 grad w)_F with n,t evaluated pointwise
        Eigen::VectorXd vx(nq), vy(nq);
        for (int q = 0; q < nq; ++q) {
          const Point2 n = fd.quad.normal(q), t = fd.quad.tangent(q);
          vx(q) = gn(q) * n.x() + dgd(q) * t.x();
          vy(q) = gn(q) * n.y() + dgd(q) * t.y();
        }
        b.head(N) += (eps_ * pen1 / cell_.h) *
                     (fd.tabs.d(1, 0).transpose() * Wf.cwiseProduct(vx) +
                      fd.tabs.d(0, 1).transpose() * Wf.cwiseProduct(vy));
        c += eps_ * (fd.DnL.transpose() * Wf.cwiseProduct(gd) -
                     fd.Dnn.transpose() * Wf.cwiseProduct(gn) -
                     fd.Dnt.transpose() * Wf.cwiseProduct(dgd));
      }
    }
    b += R.transpose() * c;
    return b;
  }

  /// Squared local energy seminorm |v|^2 of a local dof vector.
  double energy_seminorm_sq(const Eigen::VectorXd& dofs) const {
    const int N = basis_.size();
    const Eigen::VectorXd vc = dofs.head(N);
    double val = vc.dot(geps_ * vc);
    for (const auto& fd : faces_) {
      const auto& W = fd.quad.weights;
      if (fd.face->boundary) {
        const Eigen::VectorXd tv = fd.tabs.values() * vc;
        val += (sigma_ / cell_.h) * tv.dot(W.cwiseProduct(tv));
        if (use_eps()) {
          const Eigen::VectorXd gx = fd.tabs.d(1, 0) * vc;
          const Eigen::VectorXd gy = fd.tabs.d(0, 1) * vc;
          val += (eps_ / cell_.h) *
                 (gx.dot(W.cwiseProduct(gx)) + gy.dot(W.cwiseProduct(gy)));
        }
        continue;
      }
      const double s = layout_.signs[fd.dof_index];
      const Eigen::VectorXd jump =
          fd.trace_vals * dofs.segment(layout_.trace_offset(fd.dof_index),
                                       layout_.n_trace) -
          fd.tabs.values() * vc;
      val += (sigma_ / cell_.h) * jump.dot(W.cwiseProduct(jump));
      const Eigen::VectorXd gmis =
          s * (fd.gamma_vals * dofs.segment(layout_.gamma_offset(fd.dof_index),
                                            layout_.n_gamma)) -
          fd.Dn * vc;
      val += sigma_ * cell_.h * gmis.dot(W.cwiseProduct(gmis));
    }
    return val;
  }

 private:
  struct FaceData {
    const Face* face = nullptr;
    double sign = 1.0;
    int dof_index = -1;  // index into layout_.face_ids, -1 on boundary faces
    FaceQuadRule quad;
    DerivTables tabs;  // cell basis at face points, order 3
    Eigen::Matrix<double, Eigen::Dynamic, 2> nK, tg;
    // pointwise contractions of cell-basis derivatives with n_K and t
    Eigen::MatrixXd Dn, Dt, Dnn, Dnt, DnL;
    Eigen::MatrixXd trace_vals, trace_darc, gamma_vals;
  };

  bool use_eps() const { return eps_ > 0.0 && !opt_.pure_second_order; }
  double hp_factor() const {
    return opt_.hp_scaling ? (k_ + 1.0) * (k_ + 1.0) : 1.0;
  }

  void build_contractions(FaceData& fd) const {
    const int nq = fd.quad.size();
    const int N = basis_.size();
    const auto& t = fd.tabs;
    fd.Dn.resize(nq, N);
    fd.Dt.resize(nq, N);
    fd.Dnn.resize(nq, N);
    fd.Dnt.resize(nq, N);
    fd.DnL.resize(nq, N);
    for (int q = 0; q < nq; ++q) {
      const double nx = fd.nK(q, 0), ny = fd.nK(q, 1);
      const double tx = fd.tg(q, 0), ty = fd.tg(q, 1);
      fd.Dn.row(q) = nx * t.d(1, 0).row(q) + ny * t.d(0, 1).row(q);
      fd.Dt.row(q) = tx * t.d(1, 0).row(q) + ty * t.d(0, 1).row(q);
      fd.Dnn.row(q) = nx * nx * t.d(2, 0).row(q) + 2.0 * nx * ny * t.d(1, 1).row(q) +
                      ny * ny * t.d(0, 2).row(q);
      fd.Dnt.row(q) = tx * nx * t.d(2, 0).row(q) +
                      (tx * ny + ty * nx) * t.d(1, 1).row(q) +
                      ty * ny * t.d(0, 2).row(q);
      fd.DnL.row(q) = nx * (t.d(3, 0).row(q) + t.d(1, 2).row(q)) +
                      ny * (t.d(2, 1).row(q) + t.d(0, 3).row(q));
    }
  }

  Eigen::MatrixXd solve_mean_constrained(const Eigen::MatrixXd& B,
                                         bool cell_mean) const {
    const int N = basis_.size();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(N + 1, layout_.total);
    aug.topRows(N) = B;
    if (cell_mean) aug.bottomRows(1).leftCols(N) = mean_.transpose();
    return kkt_.solve(aug).topRows(N);
  }

  const Mesh2D& mesh_;
  const Cell& cell_;
  int k_;
  double eps_;
  LocalOptions opt_;
  CellBasis basis_;
  double sigma_ = 1.0;
  QuadRule cell_quad_;
  DerivTables cell_tabs_;
  Eigen::MatrixXd grad_gram_, hess_gram_, geps_;
  Eigen::VectorXd mean_;
  Eigen::PartialPivLU<Eigen::MatrixXd> kkt_;
  LocalDofLayout layout_;
  std::vector<FaceData> faces_;
};

}  // namespace hho2d
