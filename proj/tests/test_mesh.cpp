#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jf/obj_io.hpp"
#include "testutil.hpp"

#include <filesystem>
#include <fstream>

using namespace jf;
using namespace jftest;

namespace {
std::filesystem::path tmpFile(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("jf_mesh_" + name);
  return p;
}

void writeFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}
}  // namespace

TEST_CASE("single triangle derived quantities") {
  const auto p = tmpFile("tri.obj");
  writeFile(p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  Mesh m = loadObj(p);
  CHECK(m.numVertices() == 3);
  CHECK(m.numTriangles() == 1);
  CHECK(m.areas(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK((m.normals.row(0) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-14);
  CHECK((m.centroids.row(0) - Eigen::RowVector3d(1.0 / 3, 1.0 / 3, 0)).norm() < 1e-14);
}

TEST_CASE("unit square masses and area") {
  Mesh m = unitSquare();
  CHECK(m.totalArea() == doctest::Approx(1.0).epsilon(1e-14));
  // Hand-derived: vertex 0 and 2 touch both triangles, 1 and 3 one each.
  CHECK(m.vertexMass(0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(m.vertexMass(1) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(m.vertexMass(2) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(m.vertexMass(3) == doctest::Approx(1.0 / 6).epsilon(1e-14));
}

TEST_CASE("mass sum equals area and masses positive") {
  for (uint64_t seed : {1, 2, 3}) {
    Mesh m = bumpyGrid(12, seed);
    CHECK(relErr(m.vertexMass.sum(), m.totalArea()) < 1e-10);
    CHECK(m.vertexMass.minCoeff() > 0.0);
  }
  Mesh s = shapes::icosphere(2);
  CHECK(relErr(s.vertexMass.sum(), s.totalArea()) < 1e-10);
}

TEST_CASE("same-winding shared edge is rejected") {
  const auto p = tmpFile("badwind.obj");
  // Both faces traverse the edge 2->3 in the same direction.
  writeFile(p, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 2 3 4\n");
  CHECK_THROWS_AS(loadObj(p), Error);
}

TEST_CASE("non-manifold edge is rejected") {
  MatX v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0, -1, 0;
  MatXi f(3, 3);
  f << 0, 1, 2, 0, 3, 1, 1, 4, 0;  // three faces at edge (0,1)
  CHECK_THROWS_AS(Mesh::build(v, f), Error);
}

TEST_CASE("pinched vertex is rejected") {
  // Two triangles meeting only at vertex 0.
  MatX v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 1, 1, 0, -1, 0, 0, -1, -1, 0;
  MatXi f(2, 3);
  f << 0, 1, 2, 0, 3, 4;
  CHECK_THROWS_AS(Mesh::build(v, f), Error);
}

TEST_CASE("multiple components rejected") {
  MatX v(6, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0;
  MatXi f(2, 3);
  f << 0, 1, 2, 3, 4, 5;
  CHECK_THROWS_AS(Mesh::build(v, f), Error);
}

TEST_CASE("degenerate triangle rejected") {
  MatX v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0;  // first three collinear
  MatXi f(2, 3);
  f << 0, 1, 2, 0, 2, 3;
  CHECK_THROWS_AS(Mesh::build(v, f), Error);
}

TEST_CASE("face index out of range reported") {
  const auto p = tmpFile("badidx.obj");
  writeFile(p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n");
  CHECK_THROWS_AS(loadObj(p), Error);
}

TEST_CASE("fan triangulation preserves polygon area") {
  const auto p = tmpFile("quad.obj");
  writeFile(p, "v 0 0 0\nv 2 0 0\nv 2 1 0\nv 0 1 0\nf 1 2 3 4\n");
  Mesh m = loadObj(p);
  CHECK(m.numTriangles() == 2);
  CHECK(relErr(m.totalArea(), 2.0) < 1e-12);

  const auto p5 = tmpFile("pent.obj");
  // Convex planar pentagon; shoelace area as the oracle.
  writeFile(p5, "v 0 0 0\nv 2 0 0\nv 2.5 1.5 0\nv 1 2.5 0\nv -0.5 1.5 0\nf 1 2 3 4 5\n");
  Mesh pent = loadObj(p5);
  const double shoelace = 0.5 * std::abs(0.0 * 0 - 2 * 0 + 2 * 1.5 - 2.5 * 0 + 2.5 * 2.5 -
                                         1 * 1.5 + 1 * 1.5 - (-0.5) * 2.5 + (-0.5) * 0 - 0 * 1.5);
  CHECK(relErr(pent.totalArea(), shoelace) < 1e-12);
}

TEST_CASE("obj round trip is bit exact") {
  Mesh m = bumpyGrid(9, 77);
  const auto p = tmpFile("rt.obj");
  saveObj(p, m.vertices, m.triangles);
  Mesh r = loadObj(p);
  REQUIRE(r.numVertices() == m.numVertices());
  REQUIRE(r.numTriangles() == m.numTriangles());
  CHECK((r.vertices - m.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.triangles - m.triangles).cwiseAbs().maxCoeff() == 0);

  // And the written bytes themselves are reproducible.
  const auto p2 = tmpFile("rt2.obj");
  saveObj(p2, r.vertices, r.triangles);
  std::ifstream a(p, std::ios::binary), b(p2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("normalize to unit sphere") {
  Mesh sphere = shapes::icosphere(2, 2.0, Vec3(5, 0, 0));
  auto norm = normalizeToUnitSphere(sphere);
  CHECK(relErr(norm.scale, 0.5) < 1e-12);
  CHECK((norm.center - Vec3(5, 0, 0)).norm() < 1e-9);
  double maxDist = 0;
  for (int j = 0; j < norm.mesh.numVertices(); ++j) {
    maxDist = std::max(maxDist, norm.mesh.vertices.row(j).norm());
  }
  CHECK(relErr(maxDist, 1.0) < 1e-12);

  auto again = normalizeToUnitSphere(norm.mesh);
  CHECK(relErr(again.scale, 1.0) < 1e-9);
  CHECK(again.center.norm() < 1e-9);
}

TEST_CASE("normalizePositions rejects coincident points") {
  MatX pos = MatX::Zero(3, 3);
  MatXi f(1, 3);
  f << 0, 1, 2;
  CHECK_THROWS_AS(normalizePositions(pos, f), Error);
}

TEST_CASE("center of mass") {
  Mesh m = unitSquare();
  VecX com = centerOfMass(m, m.vertices);
  CHECK((com - Vec3(0.5, 0.5, 0)).norm() < 1e-14);

  MatX constant = MatX::Zero(4, 3);
  constant.rowwise() = Eigen::RowVector3d(3, -2, 7);
  VecX c2 = centerOfMass(m, constant);
  CHECK((c2 - Vec3(3, -2, 7)).norm() < 1e-14);

  // Hand-weighted: masses (1/3, 1/6, 1/3, 1/6) over the square corners.
  const double wx = (1.0 / 3 * 0 + 1.0 / 6 * 1 + 1.0 / 3 * 1 + 1.0 / 6 * 0);
  CHECK(com(0) == doctest::Approx(wx).epsilon(1e-14));
}

TEST_CASE("topology analysis") {
  Mesh square = unitSquare();
  auto topo = analyzeTopology(square);
  CHECK(topo.edgeCount == 5);
  CHECK(topo.boundaryEdgeCount == 4);
  CHECK(topo.boundaryLoops.size() == 1);
  CHECK(topo.eulerCharacteristic == 1);
  CHECK(topo.isDisk());

  auto sphereTopo = analyzeTopology(shapes::icosphere(1));
  CHECK(sphereTopo.isClosed());
  CHECK(sphereTopo.eulerCharacteristic == 2);

  auto torusTopo = analyzeTopology(shapes::torus(12, 8, 1.0, 0.3));
  CHECK(torusTopo.isClosed());
  CHECK(torusTopo.eulerCharacteristic == 0);
}

TEST_CASE("loop subdivision refines a closed mesh") {
  Mesh base = shapes::icosphere(1);
  Mesh fine = shapes::loopSubdivide(base);
  CHECK(fine.numTriangles() == 4 * base.numTriangles());
  CHECK(analyzeTopology(fine).isClosed());
  // Subdivided vertices stay near the unit sphere.
  for (int j = 0; j < fine.numVertices(); ++j) {
    CHECK(fine.vertices.row(j).norm() == doctest::Approx(1.0).epsilon(0.12));
  }
}

TEST_CASE("fixture generators are valid meshes") {
  CHECK(shapes::capsule(6, 16, 0.5, 1.0).numTriangles() > 100);
  CHECK(shapes::uvSphere(8, 12).numTriangles() == 2 * 12 * 8);
  CHECK(shapes::blob(2).numVertices() == shapes::icosphere(2).numVertices());
  CHECK(analyzeTopology(shapes::heightField(6, 6, [](double, double) { return 0.0; })).isDisk());
}
