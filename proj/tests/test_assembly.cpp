#include <catch2/catch_amalgamated.hpp>

#include "hho2d/analysis.hpp"

using namespace hho2d;

namespace {

// test-only oracle: assemble the full uncondensed system (cell + face
// unknowns jointly) into a dense matrix and solve it directly
Eigen::VectorXd monolithic_face_solution(const Mesh2D& mesh, int k, double eps,
                                         const ManufacturedCase& mc) {
  const DofMap dm = DofMap::build(mesh, k);
  const BoundaryData bd = boundary_data(mc);
  int cell_off = dm.n_condensed;
  std::vector<int> cell_offsets;
  std::vector<LocalAssembler> las;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    las.emplace_back(mesh, c, k, eps);
    cell_offsets.push_back(cell_off);
    cell_off += las.back().layout().n_cell;
  }
  const int n = cell_off;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& la = las[c];
    const auto ops = la.build();
    const Eigen::VectorXd bl =
        la.load([&](Point2 p) { return mc.source(p.x(), p.y(), eps); }, bd, ops.R);
    std::vector<int> idx;
    for (int i = 0; i < ops.layout.n_cell; ++i) idx.push_back(cell_offsets[c] + i);
    const auto fidx = dm.gather_indices(ops.layout);
    // reorder: local layout is [cell | faces], oracle uses [faces... | cells...]
    std::vector<int> map(ops.layout.total);
    for (int i = 0; i < ops.layout.n_cell; ++i) map[i] = cell_offsets[c] + i;
    for (size_t i = 0; i < fidx.size(); ++i) map[ops.layout.n_cell + i] = fidx[i];
    for (int i = 0; i < ops.layout.total; ++i) {
      b(map[i]) += bl(i);
      for (int j = 0; j < ops.layout.total; ++j) A(map[i], map[j]) += ops.A(i, j);
    }
  }
  const Eigen::VectorXd x = A.ldlt().solve(b);
  return x.head(dm.n_condensed);
}

}  // namespace

TEST_CASE("dof map sizes") {
  SECTION("1x1 mesh condenses to nothing") {
    const auto mesh = build_rect_mesh(1);
    const auto dm = DofMap::build(mesh, 1);
    CHECK(dm.n_condensed == 0);
  }
  SECTION("2x2 mesh at k=0") {
    const auto mesh = build_rect_mesh(2);
    const auto dm = DofMap::build(mesh, 0);
    CHECK(mesh.n_interior_faces() == 4);
    CHECK(dm.n_condensed == 4 * (2 * 0 + 4));
  }
}

TEST_CASE("single-cell problem is solved entirely by recovery") {
  const auto mesh = build_rect_mesh(1);
  const auto mc = get_case("poly-exact", 0);
  for (double eps : {0.0, 1.0}) {
    const auto sys = assemble(mesh, 0, eps, mc);
    CHECK(sys.dofs.n_condensed == 0);
    const auto sol = solve(sys);
    REQUIRE(sol.cell_coeffs.size() == 1);
    const double err = energy_error(mesh, 0, eps, sol, mc);
    CHECK(err < 1e-9);
  }
}

TEST_CASE("assembled matrix is symmetric positive definite") {
  const auto mesh = build_rect_mesh(4);
  const auto mc = get_case("smooth-square", 1);
  for (double eps : {0.0, 1.0}) {
    const auto sys = assemble(mesh, 1, eps, mc);
    const Eigen::MatrixXd D(sys.S);
    CHECK((D - D.transpose()).norm() <= 1e-12 * D.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    INFO("eps=" << eps);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("zero load gives the zero solution") {
  const auto mesh = build_rect_mesh(3);
  ManufacturedCase zero;
  zero.name = "zero";
  zero.domain = "unit-square";
  zero.has_exact = false;
  zero.source = [](double, double, double) { return 0.0; };
  const auto sys = assemble(mesh, 1, 0.5, zero);
  const auto sol = solve(sys);
  CHECK(sol.face_values.norm() == 0.0);
  for (const auto& c : sol.cell_coeffs) CHECK(c.norm() == 0.0);
}

TEST_CASE("global polynomial data is reproduced to solver accuracy") {
  for (int k : {0, 1}) {
    const auto mesh = build_rect_mesh(4);
    const auto mc = get_case("poly-exact", k);
    for (double eps : {0.0, 1.0}) {
      const auto sys = assemble(mesh, k, eps, mc);
      const auto sol = solve(sys);
      INFO("k=" << k << " eps=" << eps);
      CHECK(energy_error(mesh, k, eps, sol, mc) < 1e-8);
    }
  }
}

TEST_CASE("condensation matches the monolithic solve") {
  const auto mesh = build_rect_mesh(2);
  const auto mc = get_case("smooth-square", 0);
  for (double eps : {0.0, 1e-3, 1.0}) {
    const auto sys = assemble(mesh, 0, eps, mc);
    const auto sol = solve(sys);
    const Eigen::VectorXd oracle = monolithic_face_solution(mesh, 0, eps, mc);
    INFO("eps=" << eps);
    CHECK((sol.face_values - oracle).norm() <=
          1e-10 * (1.0 + oracle.norm()));
  }
}

TEST_CASE("energy error decreases under refinement") {
  const auto mc = get_case("smooth-square", 1);
  const auto m8 = build_rect_mesh(8);
  const auto m16 = build_rect_mesh(16);
  const double e8 =
      energy_error(m8, 1, 1.0, solve(assemble(m8, 1, 1.0, mc)), mc);
  const double e16 =
      energy_error(m16, 1, 1.0, solve(assemble(m16, 1, 1.0, mc)), mc);
  CHECK(e16 < e8);
}

TEST_CASE("assembly is deterministic and thread-count independent") {
  const auto mesh = build_rect_mesh(8);
  const auto mc = get_case("smooth-square", 0);
  AssemblyOptions serial;
  serial.serial = true;
  const auto s1 = assemble(mesh, 0, 1e-2, mc, serial);
  const auto s2 = assemble(mesh, 0, 1e-2, mc, serial);
  AssemblyOptions par;
  par.n_threads = 3;
  const auto s3 = assemble(mesh, 0, 1e-2, mc, par);
  const Eigen::MatrixXd d1(s1.S), d2(s2.S), d3(s3.S);
  CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1 - d3).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.rhs - s3.rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("robustness across the eps range") {
  const auto mc = get_case("smooth-square", 0);
  const auto mesh = build_rect_mesh(4);
  for (double eps : {0.0, 1e-6, 1e-4, 1e-2, 1.0}) {
    const auto sys = assemble(mesh, 0, eps, mc);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.S);
    INFO("eps=" << eps);
    CHECK(llt.info() == Eigen::Success);
    const auto sol = solve(sys);
    CHECK(std::isfinite(sol.face_values.maxCoeff()));
  }
}

TEST_CASE("condition number estimation") {
  SECTION("identity and diagonal") {
    CondensedSystem sys;
    sys.dofs.n_condensed = 2;
    sys.S.resize(2, 2);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 10.0}};
    sys.S.setFromTriplets(t.begin(), t.end());
    CHECK(condition_number(sys, CondMethod::dense) == Catch::Approx(10.0));
    sys.S.coeffRef(1, 1) = 1.0;
    CHECK(condition_number(sys, CondMethod::dense) == Catch::Approx(1.0));
  }
  SECTION("lanczos agrees with dense on a real system") {
    const auto mesh = build_rect_mesh(6);
    const auto mc = get_case("smooth-square", 0);
    const auto sys = assemble(mesh, 0, 1e-2, mc);
    REQUIRE(sys.dofs.n_condensed <= 2000);
    const double cd = condition_number(sys, CondMethod::dense);
    const double cl = condition_number(sys, CondMethod::lanczos);
    CHECK(cl == Catch::Approx(cd).epsilon(5e-3));
  }
}
