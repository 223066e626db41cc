#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hho2d/mesh.hpp"
#include "hho2d/quadrature.hpp"

using namespace hho2d;

TEST_CASE("rectangular mesh counts") {
  SECTION("single cell") {
    const auto m = build_rect_mesh(1);
    REQUIRE(m.n_cells() == 1);
    REQUIRE(m.n_faces() == 4);
    REQUIRE(m.n_interior_faces() == 0);
    for (const auto& f : m.faces()) CHECK(f.boundary);
  }
  SECTION("4x4") {
    const auto m = build_rect_mesh(4);
    REQUIRE(m.n_cells() == 16);
    REQUIRE(m.n_faces() == 2 * 4 * 5);
    REQUIRE(m.n_interior_faces() == 2 * 4 * 3);
  }
  SECTION("16x16 matches the 256-cell family member") {
    REQUIRE(build_rect_mesh(16).n_cells() == 256);
  }
}

TEST_CASE("rectangular mesh metrics") {
  const auto m = build_rect_mesh(3);
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-13));
  for (const auto& c : m.cells()) {
    CHECK(c.area == Catch::Approx(1.0 / 9.0).epsilon(1e-13));
    CHECK(c.h == Catch::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-13));
  }
  CHECK(m.mesh_size() == Catch::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-13));
}

TEST_CASE("interior faces carry opposite signs") {
  const auto m = build_rect_mesh(5);
  for (const auto& f : m.faces()) {
    if (f.boundary) continue;
    double s0 = 0, s1 = 0;
    for (int o = 0; o < 2; ++o) {
      const auto& c = m.cell(f.owners[o]);
      for (size_t i = 0; i < c.faces.size(); ++i)
        if (c.faces[i] == f.id) (o == 0 ? s0 : s1) = c.signs[i];
    }
    CHECK(s0 * s1 == -1.0);
    CHECK(s0 == 1.0);  // n_F points from the lower to the higher cell id
  }
}

TEST_CASE("boundary normals point outward on the unit square") {
  const auto m = build_rect_mesh(2);
  for (const auto& f : m.faces()) {
    if (!f.boundary) continue;
    const Point2 out = f.midpoint - Point2(0.5, 0.5);
    CHECK(f.normal.dot(out) > 0.0);
  }
}

static const char* square_file = R"(# unit square as one polygon
vertices 4
0 0
1 0
1 1
0 1
cells 1
4 0 1 2 3
)";

TEST_CASE("load single-polygon square") {
  std::istringstream in(square_file);
  const auto m = read_mesh(in);
  const auto ref = build_rect_mesh(1);
  REQUIRE(m.n_cells() == ref.n_cells());
  REQUIRE(m.n_faces() == ref.n_faces());
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(m.cell(0).h == Catch::Approx(ref.cell(0).h).epsilon(1e-14));
  CHECK(m.cell(0).centroid.x() == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("loader rejects broken inputs") {
  SECTION("open vertex loop") {
    std::istringstream in(
        "vertices 3\n0 0\n1 0\n1 1\ncells 1\n3 0 1 1\n");
    CHECK_THROWS_AS(read_mesh(in), TopologyError);
  }
  SECTION("clockwise cell") {
    std::istringstream in(
        "vertices 3\n0 0\n1 0\n1 1\ncells 1\n3 0 2 1\n");
    CHECK_THROWS_AS(read_mesh(in), TopologyError);
  }
  SECTION("arc endpoint off its circle") {
    std::istringstream in(
        "vertices 3\n0 0\n2 0\n1 1\n"
        "geometries 1\ncircle 0 0 1\n"
        "cells 1\n3 0 1 2\n"
        "arcs 1\n0 1 0\n");
    CHECK_THROWS_AS(read_mesh(in), GeometryError);
  }
  SECTION("interior arc face") {
    // two triangles sharing the arc-flagged diagonal of the square
    std::istringstream in(
        "vertices 4\n0 0\n1 0\n1 1\n0 1\n"
        "geometries 1\ncircle 0.5 -0.5 1.118033988749895\n"
        "cells 2\n3 0 1 2\n3 0 2 3\n"
        "arcs 1\n0 2 0\n");
    CHECK_THROWS_AS(read_mesh(in), TopologyError);
  }
  SECTION("dangling arc edge") {
    std::istringstream in(
        "vertices 4\n0 0\n1 0\n1 1\n0 1\n"
        "geometries 1\ncircle 0 0 1\n"
        "cells 1\n3 0 1 2\n"
        "arcs 1\n0 3 0\n");
    CHECK_THROWS_AS(read_mesh(in), TopologyError);
  }
  SECTION("malformed token") {
    std::istringstream in("vertices 1\n0 zebra\ncells 1\n3 0 0 0\n");
    CHECK_THROWS_AS(read_mesh(in), ParseError);
  }
}

TEST_CASE("mesh file round trip") {
  const auto m = build_rect_mesh(3);
  std::ostringstream out;
  write_mesh(out, m);
  std::istringstream in(out.str());
  const auto m2 = read_mesh(in);
  REQUIRE(m2.n_cells() == m.n_cells());
  REQUIRE(m2.n_faces() == m.n_faces());
  CHECK(m2.total_area() == m.total_area());
}

TEST_CASE("shipped mesh families") {
  const std::string dir = HHO2D_DATA_DIR "/meshes/";
  SECTION("voronoi polygons of the unit square") {
    const auto m = load_mesh(dir + "voronoi_64.mesh");
    CHECK(m.n_cells() == 64);
    CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-9));
    for (const auto& f : m.faces()) CHECK(f.kind == FaceKind::Straight);
  }
  SECTION("curved annulus triangles") {
    const auto m = load_mesh(dir + "annulus_0.mesh");
    const double area = M_PI * (1.0 - 0.4 * 0.4);
    CHECK(m.total_area() == Catch::Approx(area).epsilon(1e-12));
    for (const auto& f : m.faces()) {
      if (f.boundary)
        CHECK(f.kind == FaceKind::Arc);
      else
        CHECK(f.kind == FaceKind::Straight);
    }
    // quadrature-level area reproduction across the whole mesh
    double qarea = 0.0;
    for (const auto& c : m.cells())
      qarea += cell_quadrature(m, c, 2, 30).weights.sum();
    CHECK(qarea == Catch::Approx(area).epsilon(1e-8));
  }
  SECTION("snapping the straightened annulus recovers the arcs") {
    const auto straight = load_mesh(dir + "annulus_0_straight.mesh");
    const auto arcs = load_mesh(dir + "annulus_0.mesh");
    const auto snapped =
        snap_boundary_to_arcs(straight, arcs.geometries(), 1e-7);
    REQUIRE(snapped.n_faces() == arcs.n_faces());
    CHECK(snapped.total_area() ==
          Catch::Approx(arcs.total_area()).epsilon(1e-12));
    int n_arcs = 0;
    for (const auto& f : snapped.faces()) n_arcs += f.kind == FaceKind::Arc;
    CHECK(n_arcs == static_cast<int>(arcs.arc_edges().size()));
  }
}

TEST_CASE("snap boundary to arcs") {
  SECTION("inscribed triangle becomes the full disc") {
    // equilateral triangle inscribed in the unit circle
    std::vector<Point2> verts;
    for (int i = 0; i < 3; ++i) {
      const double th = 2.0 * M_PI * i / 3.0;
      verts.emplace_back(std::cos(th), std::sin(th));
    }
    Mesh2D tri(verts, {{0, 1, 2}});
    const ArcGeometry circle{{0.0, 0.0}, 1.0};
    const auto snapped = snap_boundary_to_arcs(tri, {circle}, 1e-8);
    REQUIRE(snapped.n_faces() == 3);
    for (const auto& f : snapped.faces()) {
      REQUIRE(f.kind == FaceKind::Arc);
      CHECK(f.sweep == Catch::Approx(2.0 * M_PI / 3.0).epsilon(1e-13));
    }
    CHECK(snapped.cell(0).area == Catch::Approx(M_PI).epsilon(1e-13));
    CHECK(snapped.cell(0).centroid.norm() < 1e-13);
    CHECK(snapped.cell(0).h == Catch::Approx(2.0).epsilon(5e-3));  // arc sampled at 8 points
  }
  SECTION("vertex too far from every circle") {
    Mesh2D tri({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 2}});
    const ArcGeometry circle{{5.0, 5.0}, 1.0};
    CHECK_THROWS_AS(snap_boundary_to_arcs(tri, {circle}, 1e-3), GeometryError);
  }
}
