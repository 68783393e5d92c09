#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stvf/mesh.hpp"

#include <set>
#include <sstream>

using namespace stvf;

namespace {

// Independent half-edge counting: every triangle contributes three
// half-edges, boundary edges have one, interior edges two.
Index expected_edge_count(int level) {
  const Index n = Index(1) << level;
  const Index half_edges = 3 * 4 * n * n;
  const Index boundary = 4 * n;
  return (half_edges + boundary) / 2;
}

double signed_area(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangles();
  const Eigen::Vector2d a = mesh.vertex(tri(0, t));
  const Eigen::Vector2d b = mesh.vertex(tri(1, t));
  const Eigen::Vector2d c = mesh.vertex(tri(2, t));
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

TEST_CASE("level 1 counts match the hand enumeration") {
  const auto mesh = Mesh::build_crisscross(1);
  CHECK(mesh->vertex_count() == 13);  // 9 grid nodes + 4 centers
  CHECK(mesh->triangle_count() == 16);
  CHECK(mesh->edge_count() == 28);

  Index boundary_edges = 0;
  for (const Edge& e : mesh->edges()) {
    if (e.boundary) ++boundary_edges;
  }
  CHECK(boundary_edges == 8);

  Index boundary_vertices = 0;
  for (Index v = 0; v < mesh->vertex_count(); ++v) {
    if (mesh->vertex_on_boundary(v)) ++boundary_vertices;
  }
  CHECK(boundary_vertices == 8);
}

TEST_CASE("level 2 counts") {
  const auto mesh = Mesh::build_crisscross(2);
  CHECK(mesh->vertex_count() == 41);
  CHECK(mesh->triangle_count() == 64);
  CHECK(mesh->edge_count() == 104);
  CHECK(mesh->edge_count() == expected_edge_count(2));
}

TEST_CASE("triangles are congruent, counterclockwise and tile the square") {
  for (int level : {1, 2, 3}) {
    const auto mesh = Mesh::build_crisscross(level);
    const double h = mesh->h();
    double total = 0.0;
    for (Index t = 0; t < mesh->triangle_count(); ++t) {
      const double area = signed_area(*mesh, t);
      CHECK(area == doctest::Approx(h * h / 4.0).epsilon(1e-14));
      CHECK(area > 0.0);
      total += area;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("Euler formula V - E + F = 1") {
  for (int level : {1, 2, 3, 4}) {
    const auto mesh = Mesh::build_crisscross(level);
    CHECK(mesh->vertex_count() - mesh->edge_count() + mesh->triangle_count() == 1);
    CHECK(mesh->edge_count() == expected_edge_count(level));
  }
}

TEST_CASE("interior edges have two adjacent triangles, boundary edges one") {
  const auto mesh = Mesh::build_crisscross(3);
  for (const Edge& e : mesh->edges()) {
    CHECK(e.left >= 0);
    if (e.boundary) {
      CHECK(e.right == -1);
    } else {
      CHECK(e.right >= 0);
    }
  }
}

TEST_CASE("edge barycenters are midpoints inside the square") {
  const auto mesh = Mesh::build_crisscross(1);
  bool found = false;
  for (Index e = 0; e < mesh->edge_count(); ++e) {
    const Edge& edge = mesh->edges()[static_cast<std::size_t>(e)];
    const Eigen::Vector2d pa = mesh->vertex(edge.a);
    const Eigen::Vector2d pb = mesh->vertex(edge.b);
    const Eigen::Vector2d bary = mesh->edge_barycenter(e);
    CHECK((bary - 0.5 * (pa + pb)).norm() == doctest::Approx(0.0));
    CHECK(bary.x() >= 0.0);
    CHECK(bary.x() <= 1.0);
    CHECK(bary.y() >= 0.0);
    CHECK(bary.y() <= 1.0);
    // The bottom-left horizontal boundary edge has barycenter (0.25, 0).
    if ((pa - Eigen::Vector2d(0, 0)).norm() < 1e-15 &&
        (pb - Eigen::Vector2d(0.5, 0)).norm() < 1e-15) {
      CHECK(bary.x() == doctest::Approx(0.25));
      CHECK(bary.y() == doctest::Approx(0.0));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("construction is deterministic") {
  const auto a = Mesh::build_crisscross(3);
  const auto b = Mesh::build_crisscross(3);
  CHECK(a->vertices() == b->vertices());
  CHECK(a->triangles() == b->triangles());
  REQUIRE(a->edge_count() == b->edge_count());
  for (Index e = 0; e < a->edge_count(); ++e) {
    CHECK(a->edges()[e].a == b->edges()[e].a);
    CHECK(a->edges()[e].b == b->edges()[e].b);
  }
}

TEST_CASE("invalid levels are rejected") {
  CHECK_THROWS_AS(Mesh::build_crisscross(0), std::invalid_argument);
  CHECK_THROWS_AS(Mesh::build_crisscross(-3), std::invalid_argument);
  CHECK_THROWS_AS(Mesh::build_crisscross(15), std::invalid_argument);
}

TEST_CASE("locate returns the containing triangle") {
  const auto mesh = Mesh::build_crisscross(2);
  for (Index t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tri = mesh->triangles();
    const Eigen::Vector2d centroid = (mesh->vertex(tri(0, t)) + mesh->vertex(tri(1, t)) +
                                      mesh->vertex(tri(2, t))) /
                                     3.0;
    CHECK(mesh->locate(centroid) == t);
  }
}

TEST_CASE("OFF dump lists vertices then triangles") {
  const auto mesh = Mesh::build_crisscross(1);
  std::ostringstream os;
  mesh->write_off(os);
  std::istringstream is(os.str());
  std::string header;
  is >> header;
  CHECK(header == "OFF");
  int nv = 0, nt = 0, ne = 0;
  is >> nv >> nt >> ne;
  CHECK(nv == 13);
  CHECK(nt == 16);
  CHECK(ne == 28);
}
