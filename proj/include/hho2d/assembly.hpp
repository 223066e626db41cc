// Global degree-of-freedom map over interior faces, cellwise assembly with
// static condensation of the cell blocks, sparse SPD solve and recovery of
// the eliminated cell unknowns.

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <future>
#include <thread>

#include "hho2d/cases.hpp"

namespace hho2d {

/// Condensed unknowns: per interior face a trace block P^{k+2}(F) followed
/// by a normal-derivative block P^k(F). Boundary faces carry nothing.
struct DofMap {
  int k = 0;
  int trace_size = 0;  // k+3
  int gamma_size = 0;  // k+1
  std::vector<int> face_offset;  // -1 on boundary faces
  int n_condensed = 0;

  static DofMap build(const Mesh2D& mesh, int k) {
    DofMap dm;
    dm.k = k;
    dm.trace_size = k + 3;
    dm.gamma_size = k + 1;
    dm.face_offset.assign(mesh.n_faces(), -1);
    int off = 0;
    for (const auto& f : mesh.faces()) {
      if (f.boundary) continue;
      dm.face_offset[f.id] = off;
      off += dm.trace_size + dm.gamma_size;
    }
    dm.n_condensed = off;
    return dm;
  }

  /// Global indices of a cell's face unknowns in local layout order.
  std::vector<int> gather_indices(const LocalDofLayout& lay) const {
    std::vector<int> idx;
    idx.reserve(lay.total - lay.n_cell);
    for (int i = 0; i < lay.n_faces(); ++i) {
      const int off = face_offset[lay.face_ids[i]];
      for (int j = 0; j < trace_size + gamma_size; ++j) idx.push_back(off + j);
    }
    return idx;
  }
};

struct AssemblyOptions : LocalOptions {
  bool serial = false;
  int n_threads = 0;  // 0: hardware concurrency
};

struct CellRecovery {
  LocalDofLayout layout;
  Eigen::LLT<Eigen::MatrixXd> Acc;  // factorized cell block
  Eigen::MatrixXd Acf;
  Eigen::VectorXd bc;
};

struct CondensedSystem {
  DofMap dofs;
  Eigen::SparseMatrix<double> S;
  Eigen::VectorXd rhs;
  std::vector<CellRecovery> recovery;
  int k = 0;
  double eps = 0.0;
  AssemblyOptions options;
};

/// Discrete solution: cell polynomial coefficients plus the condensed face
/// vector (traces and n_F-oriented normal derivatives per interior face).
struct HhoSolution {
  DofMap dofs;
  double eps = 0.0;
  std::vector<Eigen::VectorXd> cell_coeffs;
  Eigen::VectorXd face_values;

  Eigen::VectorXd trace(int face_id) const {
    return face_values.segment(dofs.face_offset[face_id], dofs.trace_size);
  }
  Eigen::VectorXd gamma(int face_id) const {
    return face_values.segment(dofs.face_offset[face_id] + dofs.trace_size,
                               dofs.gamma_size);
  }
  /// Local dof vector of a cell in the given layout.
  Eigen::VectorXd gather(const LocalDofLayout& lay, int cell_id) const {
    Eigen::VectorXd v(lay.total);
    v.head(lay.n_cell) = cell_coeffs[cell_id];
    const int per_face = dofs.trace_size + dofs.gamma_size;
    for (int i = 0; i < lay.n_faces(); ++i)
      v.segment(lay.trace_offset(i), per_face) =
          face_values.segment(dofs.face_offset[lay.face_ids[i]], per_face);
    return v;
  }
};

// ---------------------------------------------------------------------------
// assembly

namespace detail {

struct CellContribution {
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<int, double>> rhs;
  std::vector<CellRecovery> recovery;  // in cell order within the chunk
};

inline void assemble_cell_range(const Mesh2D& mesh, int k, double eps,
                                const ManufacturedCase& mc,
                                const AssemblyOptions& opt, const DofMap& dm,
                                int begin, int end, CellContribution& out) {
  const BoundaryData bd = boundary_data(mc);
  for (int c = begin; c < end; ++c) {
    LocalAssembler la(mesh, c, k, eps, opt);
    LocalOperatorSet ops = la.build();
    auto f = [&](Point2 p) { return mc.source(p.x(), p.y(), la.eps()); };
    const Eigen::VectorXd b = la.load(f, bd, ops.R);

    const int nc = ops.layout.n_cell;
    const int nf = ops.layout.total - nc;
    CellRecovery rec;
    rec.layout = ops.layout;
    rec.Acc.compute(ops.A.topLeftCorner(nc, nc));
    if (rec.Acc.info() != Eigen::Success)
      throw SolveError("cell block not SPD during condensation (cell " +
                       std::to_string(c) + ")");
    rec.Acf = ops.A.topRightCorner(nc, nf);
    rec.bc = b.head(nc);

    if (nf > 0) {
      const Eigen::MatrixXd X = rec.Acc.solve(rec.Acf);
      Eigen::MatrixXd Sloc =
          ops.A.bottomRightCorner(nf, nf) - rec.Acf.transpose() * X;
      Sloc = 0.5 * (Sloc + Sloc.transpose().eval());
      const Eigen::VectorXd gloc =
          b.tail(nf) - X.transpose() * rec.bc;
      const auto idx = dm.gather_indices(ops.layout);
      for (int i = 0; i < nf; ++i) {
        out.rhs.emplace_back(idx[i], gloc(i));
        for (int j = 0; j < nf; ++j)
          out.triplets.emplace_back(idx[i], idx[j], Sloc(i, j));
      }
    }
    out.recovery.push_back(std::move(rec));
  }
}

}  // namespace detail

/// Cellwise assembly with Schur-complement elimination of the cell blocks.
/// The parallel path produces the same triplet stream as the serial one
/// (chunks merged in cell order), so the matrix is bitwise reproducible.
inline CondensedSystem assemble(const Mesh2D& mesh, int k, double eps,
                                const ManufacturedCase& mc,
                                AssemblyOptions opt = {}) {
  if (k < 0 || eps < 0.0) throw Error("assemble requires k >= 0 and eps >= 0");
  CondensedSystem sys;
  sys.dofs = DofMap::build(mesh, k);
  sys.k = k;
  sys.eps = eps;
  sys.options = opt;

  const int nc = mesh.n_cells();
  int n_threads = opt.serial ? 1 : opt.n_threads;
  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<int>(n_threads, std::max(1, nc / 16));

  std::vector<detail::CellContribution> parts(n_threads);
  if (n_threads == 1) {
    detail::assemble_cell_range(mesh, k, eps, mc, opt, sys.dofs, 0, nc, parts[0]);
  } else {
    std::vector<std::future<void>> jobs;
    const int chunk = (nc + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int b = t * chunk, e = std::min(nc, b + chunk);
      jobs.push_back(std::async(std::launch::async, [&, t, b, e] {
        detail::assemble_cell_range(mesh, k, eps, mc, opt, sys.dofs, b, e, parts[t]);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  std::vector<Eigen::Triplet<double>> trip;
  size_t total = 0;
  for (const auto& p : parts) total += p.triplets.size();
  trip.reserve(total);
  sys.rhs = Eigen::VectorXd::Zero(sys.dofs.n_condensed);
  sys.recovery.reserve(nc);
  for (auto& p : parts) {
    trip.insert(trip.end(), p.triplets.begin(), p.triplets.end());
    for (const auto& [i, v] : p.rhs) sys.rhs(i) += v;
    for (auto& r : p.recovery) sys.recovery.push_back(std::move(r));
  }
  sys.S.resize(sys.dofs.n_condensed, sys.dofs.n_condensed);
  sys.S.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

/// Direct symmetric factorization plus cellwise back-substitution.
inline HhoSolution solve(const CondensedSystem& sys) {
  HhoSolution sol;
  sol.dofs = sys.dofs;
  sol.eps = sys.eps;
  sol.face_values = Eigen::VectorXd::Zero(sys.dofs.n_condensed);

  if (sys.dofs.n_condensed > 0) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.S);
    if (llt.info() != Eigen::Success)
      throw SolveError("condensed matrix is not SPD (factorization failed)");
    sol.face_values = llt.solve(sys.rhs);
    // one refinement sweep, then enforce the residual contract
    const Eigen::VectorXd r = sys.rhs - sys.S * sol.face_values;
    sol.face_values += llt.solve(r);
    const double rn = (sys.rhs - sys.S * sol.face_values).norm();
    const double bn = sys.rhs.norm();
    if (bn > 0.0 && rn / bn > 1e-10)
      throw SolveError("condensed solve residual above tolerance");
  }

  sol.cell_coeffs.resize(sys.recovery.size());
  for (size_t c = 0; c < sys.recovery.size(); ++c) {
    const auto& rec = sys.recovery[c];
    const int nf = rec.layout.total - rec.layout.n_cell;
    if (nf == 0) {
      sol.cell_coeffs[c] = rec.Acc.solve(rec.bc);
      continue;
    }
    const auto idx = sys.dofs.gather_indices(rec.layout);
    Eigen::VectorXd xf(nf);
    for (int i = 0; i < nf; ++i) xf(i) = sol.face_values(idx[i]);
    sol.cell_coeffs[c] = rec.Acc.solve(rec.bc - rec.Acf * xf);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// condition number

enum class CondMethod { dense, lanczos };

namespace detail {

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization; `apply` computes y = Op x.
inline double lanczos_top(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int n,
    double rel_tol, int max_iter) {
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  v.normalize();
  std::vector<Eigen::VectorXd> V{v};
  std::vector<double> alpha, beta;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = apply(V.back());
    const double a = V.back().dot(w);
    alpha.push_back(a);
    w -= a * V.back();
    if (V.size() > 1) w -= beta.back() * V[V.size() - 2];
    for (const auto& u : V) w -= u.dot(w) * u;  // full reorthogonalization
    const double b = w.norm();

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const int top = m - 1;  // eigenvalues ascending
    const double est = es.eigenvalues()(top);
    // Ritz residual bound ||A y - est y|| = b * |last component|
    const double resid = b * std::abs(es.eigenvectors()(m - 1, top));
    if (m >= 2 && resid <= rel_tol * std::abs(est)) return est;
    if (b < 1e-14 * std::abs(alpha[0])) return est;  // invariant subspace hit
    beta.push_back(b);
    V.push_back(w / b);
  }
  throw SolveError("Lanczos eigenvalue estimate did not converge");
}

}  // namespace detail

/// Euclidean condition number of the condensed matrix: dense eigensolve for
/// small systems, extremal Lanczos (shift-invert for the low end) otherwise.
inline double condition_number(const CondensedSystem& sys,
                               CondMethod method = CondMethod::dense) {
  const int n = sys.dofs.n_condensed;
  if (n < 1) throw Error("condition number of an empty system");
  if (method == CondMethod::dense) {
    if (n > 2000) throw Error("dense condition number limited to size 2000");
    const Eigen::MatrixXd D(sys.S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  }
  const double lmax = detail::lanczos_top(
      [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(sys.S * x); }, n,
      1e-3, 2000);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.S);
  if (llt.info() != Eigen::Success)
    throw SolveError("condensed matrix is not SPD (factorization failed)");
  const double inv_lmin = detail::lanczos_top(
      [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(llt.solve(x)); }, n,
      1e-3, 2000);
  return lmax * inv_lmin;
}

/// Auto-select the method by the spec'd size threshold.
inline double condition_number_auto(const CondensedSystem& sys) {
  return condition_number(
      sys, sys.dofs.n_condensed <= 2000 ? CondMethod::dense : CondMethod::lanczos);
}

}  // namespace hho2d
