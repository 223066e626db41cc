// Error measurement in the eps-weighted energy seminorm and in L2, observed
// convergence rates, the local stability ratio probe and the boundary-layer
// cell flagging diagnostic.

#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "hho2d/assembly.hpp"

namespace hho2d {

struct ErrorRow {
  int cells = 0;
  double h = 0.0;
  int k = 0;
  double eps = 0.0;
  int dofs = 0;
  double energy_err = std::numeric_limits<double>::quiet_NaN();
  double l2_err = std::numeric_limits<double>::quiet_NaN();
  double cond = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
};

/// Relative error of the post-processed field R_K(u) = R^i_K(u_K) + L_K(u)
/// in the broken eps-weighted energy seminorm, quadrature degree 2(k+2)+4.
inline double energy_error(const Mesh2D& mesh, int k, double eps,
                           const HhoSolution& sol, const ManufacturedCase& mc,
                           const AssemblyOptions& opt = {}) {
  if (!mc.has_exact) return std::numeric_limits<double>::quiet_NaN();
  const BoundaryData bd = boundary_data(mc);
  double num = 0.0, den = 0.0;
  for (const auto& cell : mesh.cells()) {
    LocalAssembler la(mesh, cell.id, k, eps, opt);
    const Eigen::VectorXd rec =
        la.reconstruction() * sol.gather(la.layout(), cell.id) + la.lifting(bd);
    const QuadRule q =
        cell_quadrature(mesh, cell, 2 * (k + 2) + 4, opt.n_subedges);
    const auto tabs = la.cell_basis().eval(q.points, 2);
    for (int i = 0; i < q.size(); ++i) {
      const auto s = mc.fields(q.point(i).x(), q.point(i).y());
      const double dgx = s.ux - tabs.d(1, 0).row(i).dot(rec);
      const double dgy = s.uy - tabs.d(0, 1).row(i).dot(rec);
      const double dxx = s.uxx - tabs.d(2, 0).row(i).dot(rec);
      const double dxy = s.uxy - tabs.d(1, 1).row(i).dot(rec);
      const double dyy = s.uyy - tabs.d(0, 2).row(i).dot(rec);
      num += q.weights(i) *
             (dgx * dgx + dgy * dgy + eps * (dxx * dxx + 2 * dxy * dxy + dyy * dyy));
      den += q.weights(i) * (s.ux * s.ux + s.uy * s.uy +
                             eps * (s.uxx * s.uxx + 2 * s.uxy * s.uxy + s.uyy * s.uyy));
    }
  }
  return std::sqrt(num / den);
}

/// Relative L2 error; measures the post-processed reconstruction by default,
/// the raw cell polynomial u_K when `raw_cell_field` is set.
inline double l2_error(const Mesh2D& mesh, int k, const HhoSolution& sol,
                       const ManufacturedCase& mc, const AssemblyOptions& opt = {},
                       bool raw_cell_field = false, double eps = 0.0) {
  if (!mc.has_exact) return std::numeric_limits<double>::quiet_NaN();
  const BoundaryData bd = boundary_data(mc);
  double num = 0.0, den = 0.0;
  for (const auto& cell : mesh.cells()) {
    LocalAssembler la(mesh, cell.id, k, eps, opt);
    Eigen::VectorXd field;
    if (raw_cell_field)
      field = sol.cell_coeffs[cell.id];
    else
      field = la.reconstruction() * sol.gather(la.layout(), cell.id) + la.lifting(bd);
    const QuadRule q =
        cell_quadrature(mesh, cell, 2 * (k + 2) + 4, opt.n_subedges);
    const auto tabs = la.cell_basis().eval(q.points, 0);
    for (int i = 0; i < q.size(); ++i) {
      const double uex = mc.fields(q.point(i).x(), q.point(i).y()).u;
      const double d = uex - tabs.values().row(i).dot(field);
      num += q.weights(i) * d * d;
      den += q.weights(i) * uex * uex;
    }
  }
  return std::sqrt(num / den);
}

/// Rates log(e_c/e_f) / log(h_c/h_f) between consecutive rows; NaN where a
/// rate is undefined (zero or non-finite errors).
inline std::vector<double> convergence_rates(const std::vector<double>& h,
                                             const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw Error("convergence_rates needs at least two matching rows");
  std::vector<double> rates;
  for (size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] < h[i - 1]))
      throw Error("mesh sizes must decrease along a refinement family");
    const bool ok = std::isfinite(err[i]) && std::isfinite(err[i - 1]) &&
                    err[i] > 0.0 && err[i - 1] > 0.0;
    rates.push_back(ok ? std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i])
                       : std::numeric_limits<double>::quiet_NaN());
  }
  return rates;
}

/// Extremes over all cells of (|grad R(v)|^2_eps + S^i + S^b) / |v|^2 for
/// random local vectors; a discrete surrogate of the local stability bounds.
inline std::pair<double, double> lemma41_ratio_probe(const Mesh2D& mesh, int k,
                                                     double eps, int n_samples,
                                                     const LocalOptions& opt = {},
                                                     unsigned seed = 99) {
  if (n_samples < 1) throw Error("lemma41_ratio_probe needs n_samples >= 1");
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& cell : mesh.cells()) {
    LocalAssembler la(mesh, cell.id, k, eps, opt);
    const auto ops = la.build();
    for (int s = 0; s < n_samples; ++s) {
      Eigen::VectorXd v(la.layout().total);
      for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
      v.normalize();
      const double den = la.energy_seminorm_sq(v);
      if (den <= 1e-14) continue;
      const double ratio = v.dot(ops.A * v) / den;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo, hi};
}

struct LayerFlagReport {
  std::vector<int> flagged;  // cell ids of T_h^*
  double theta = 0.3;
  double max_hessian = 0.0;
  double flagged_area = 0.0;
};

/// Flag cells whose vertex-mean Hessian norm of the reconstructed field
/// reaches theta times the mesh-wide maximum. The L-infinity norm on each
/// cell is estimated by the mean over its vertices (all vertices on general
/// polygons, the three corners on triangles).
inline LayerFlagReport flag_boundary_layer(const Mesh2D& mesh, int k,
                                           const HhoSolution& sol, double theta,
                                           const AssemblyOptions& opt = {},
                                           const BoundaryData& bd = BoundaryData::zero()) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error("theta must lie in (0,1)");
  LayerFlagReport rep;
  rep.theta = theta;
  std::vector<double> est(mesh.n_cells(), 0.0);
  for (const auto& cell : mesh.cells()) {
    LocalAssembler la(mesh, cell.id, k, sol.eps, opt);
    const Eigen::VectorXd rec =
        la.reconstruction() * sol.gather(la.layout(), cell.id) + la.lifting(bd);
    Eigen::Matrix<double, Eigen::Dynamic, 2> pts(cell.vertices.size(), 2);
    for (size_t v = 0; v < cell.vertices.size(); ++v)
      pts.row(v) = mesh.vertices()[cell.vertices[v]].transpose();
    const auto tabs = la.cell_basis().eval(pts, 2);
    double mean = 0.0;
    for (int i = 0; i < pts.rows(); ++i) {
      const double hxx = tabs.d(2, 0).row(i).dot(rec);
      const double hxy = tabs.d(1, 1).row(i).dot(rec);
      const double hyy = tabs.d(0, 2).row(i).dot(rec);
      mean += std::sqrt(hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
    }
    est[cell.id] = mean / static_cast<double>(pts.rows());
    rep.max_hessian = std::max(rep.max_hessian, est[cell.id]);
  }
  if (rep.max_hessian <= 1e-14) return rep;  // flat field: flag nothing
  for (const auto& cell : mesh.cells()) {
    if (est[cell.id] >= theta * rep.max_hessian) {
      rep.flagged.push_back(cell.id);
      rep.flagged_area += cell.area;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// one-shot driver shared by the CLI and the acceptance suite

struct RunResult {
  HhoSolution sol;
  ErrorRow row;
};

inline RunResult run_single(const Mesh2D& mesh, int k, double eps,
                            const ManufacturedCase& mc, AssemblyOptions opt = {},
                            bool want_cond = false) {
  const auto t0 = std::chrono::steady_clock::now();
  const CondensedSystem sys = assemble(mesh, k, eps, mc, opt);
  RunResult out;
  out.sol = solve(sys);
  out.row.cells = mesh.n_cells();
  out.row.h = mesh.mesh_size();
  out.row.k = k;
  out.row.eps = eps;
  out.row.dofs = sys.dofs.n_condensed;
  if (mc.has_exact) {
    out.row.energy_err = energy_error(mesh, k, eps, out.sol, mc, opt);
    out.row.l2_err = l2_error(mesh, k, out.sol, mc, opt, false, eps);
  }
  if (want_cond && sys.dofs.n_condensed > 0)
    out.row.cond = condition_number_auto(sys);
  out.row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace hho2d
