#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jf/spectral.hpp"
#include "testutil.hpp"

#include <Eigen/Dense>

#include <array>
#include <numbers>

using namespace jf;
using namespace jftest;

namespace {

OperatorCache cacheFor(const Mesh& m) { return buildOperatorCache(std::make_shared<Mesh>(m)); }

}  // namespace

TEST_CASE("first eigenpair is the constant null space") {
  for (const Mesh& m : {bumpyGrid(9, 1), shapes::icosphere(2)}) {
    auto cache = cacheFor(m);
    auto spec = computeSpectrum(cache.laplacian, m.vertexMass, 12);
    CHECK(spec.eigenvalues(0) < 1e-8);
    const VecX phi1 = spec.eigenvectors.col(0);
    CHECK((phi1.array() - phi1.mean()).abs().maxCoeff() < 1e-6);
    for (int c = 1; c < spec.count(); ++c) {
      CHECK(spec.eigenvalues(c) >= spec.eigenvalues(c - 1) - 1e-12);
    }
  }
}

TEST_CASE("A-orthonormality of eigenvectors") {
  Mesh m = bumpyGrid(10, 2);
  auto cache = cacheFor(m);
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, 16);
  MatX gram = spec.eigenvectors.transpose() * m.vertexMass.asDiagonal() * spec.eigenvectors;
  CHECK((gram - MatX::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("flat square grid approximates the Neumann spectrum") {
  Mesh grid = shapes::heightField(20, 20, [](double, double) { return 0.0; });
  auto cache = cacheFor(grid);
  auto spec = computeSpectrum(cache.laplacian, grid.vertexMass, 6);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(relErr(spec.eigenvalues(1), pi2) < 0.10);
  // Double eigenvalue pi^2 (modes cos(pi x) and cos(pi y)).
  CHECK(relErr(spec.eigenvalues(2), pi2) < 0.10);
}

TEST_CASE("matches a dense generalized eigensolver on a tiny mesh") {
  // 5-vertex fan.
  MatX v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, -1, 0.5, 0;
  MatXi f(3, 3);
  f << 0, 1, 2, 0, 2, 3, 0, 3, 4;
  Mesh m = Mesh::build(v, f);
  auto cache = cacheFor(m);
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, 4);

  MatX Ld = MatX(cache.laplacian);
  Ld = 0.5 * (Ld + Ld.transpose()).eval();
  MatX Ad = m.vertexMass.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> oracle(Ld, Ad);
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(spec.eigenvalues(c) - oracle.eigenvalues()(c)) < 1e-9);
    // Vectors up to sign.
    VecX a = spec.eigenvectors.col(c);
    VecX b = oracle.eigenvectors().col(c);
    const double sign = a.dot(m.vertexMass.asDiagonal() * b) >= 0 ? 1.0 : -1.0;
    CHECK((a - sign * b).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("WKS is rigid-motion invariant") {
  Mesh m = bumpyGrid(9, 3);
  Rng rng(7);
  const Mat3 q = randomRotation(rng);
  MatX moved = m.vertices * q.transpose();
  moved.rowwise() += Eigen::RowVector3d(1, -2, 0.5);
  Mesh m2 = Mesh::build(moved, m.triangles);

  FeatureConfig config;
  config.wksSamples = 24;
  config.eigenCount = 20;
  auto cacheA = cacheFor(m);
  auto cacheB = cacheFor(m2);
  auto specA = computeSpectrum(cacheA.laplacian, m.vertexMass, config.eigenCount);
  auto specB = computeSpectrum(cacheB.laplacian, m2.vertexMass, config.eigenCount);
  MatX fa = centroidFeatures(m, &specA, config);
  MatX fb = centroidFeatures(m2, &specB, config);
  CHECK((fa.rightCols(24) - fb.rightCols(24)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("WKS is eigenvector-sign invariant") {
  Mesh m = bumpyGrid(8, 4);
  auto cache = cacheFor(m);
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, 16);
  auto flipped = spec;
  for (int c = 0; c < flipped.count(); c += 2) flipped.eigenvectors.col(c) *= -1.0;
  MatX a = wksSignatures(spec, spec.eigenvectors, 20, 7.0);
  MatX b = wksSignatures(flipped, flipped.eigenvectors, 20, 7.0);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric points get equal signatures") {
  // Criss-cross grid (four triangles per quad): both the geometry and the
  // triangulation are exactly mirror-symmetric about x = 0.5.
  const int n = 9;
  auto tent = [](double x, double y) {
    return 0.3 * std::min(x, 1.0 - x) + 0.1 * std::sin(3.0 * y);
  };
  const int centers = (n - 1) * (n - 1);
  MatX v(n * n + centers, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) / (n - 1);
      const double y = static_cast<double>(j) / (n - 1);
      v.row(i * n + j) << x, y, tent(x, y);
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double x = (i + 0.5) / (n - 1);
      const double y = (j + 0.5) / (n - 1);
      v.row(n * n + i * (n - 1) + j) << x, y, tent(x, y);
    }
  }
  std::vector<std::array<int, 3>> tris;
  auto g = [&](int i, int j) { return i * n + j; };
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const int c = n * n + i * (n - 1) + j;
      tris.push_back({g(i, j), g(i + 1, j), c});
      tris.push_back({g(i + 1, j), g(i + 1, j + 1), c});
      tris.push_back({g(i + 1, j + 1), g(i, j + 1), c});
      tris.push_back({g(i, j + 1), g(i, j), c});
    }
  }
  MatXi f(tris.size(), 3);
  for (size_t t = 0; t < tris.size(); ++t) f.row(t) << tris[t][0], tris[t][1], tris[t][2];
  Mesh m = Mesh::build(v, f);

  auto cache = cacheFor(m);
  FeatureConfig config;
  config.wksSamples = 16;
  config.eigenCount = 18;
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, config.eigenCount);
  MatX wks = wksSignatures(spec, spec.eigenvectors, config.wksSamples, config.sigmaFactor);
  for (int j = 0; j < n; ++j) {
    CHECK((wks.row(g(2, j)) - wks.row(g(n - 3, j))).cwiseAbs().maxCoeff() < 2e-4);
  }
}

TEST_CASE("uniform scale shifts eigenvalues by 1/s^2") {
  Mesh m = bumpyGrid(8, 5);
  Mesh scaled = Mesh::build(2.0 * m.vertices, m.triangles);
  auto ca = cacheFor(m);
  auto cb = cacheFor(scaled);
  auto sa = computeSpectrum(ca.laplacian, m.vertexMass, 10);
  auto sb = computeSpectrum(cb.laplacian, scaled.vertexMass, 10);
  for (int c = 1; c < 10; ++c) {
    CHECK(relErr(sb.eigenvalues(c), sa.eigenvalues(c) / 4.0) < 1e-8);
  }
}

TEST_CASE("feature assembly") {
  Mesh tri = singleTriangle();
  FeatureConfig noWks;
  noWks.wksSamples = 0;
  MatX f = centroidFeatures(tri, nullptr, noWks);
  REQUIRE(f.cols() == 6);
  CHECK((f.row(0).head(3) - Eigen::RowVector3d(1.0 / 3, 1.0 / 3, 0)).norm() < 1e-14);
  CHECK((f.row(0).tail(3) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-14);

  Mesh m = bumpyGrid(8, 6);
  auto cache = cacheFor(m);
  FeatureConfig config;
  config.wksSamples = 10;
  config.eigenCount = 12;
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, config.eigenCount);
  MatX cf = centroidFeatures(m, &spec, config);
  CHECK(cf.rows() == m.numTriangles());
  CHECK(cf.cols() == 16);
  CHECK(cf.rightCols(10).minCoeff() >= 0.0);  // WKS entries nonnegative

  MatX vf = vertexFeatures(m, &spec, config);
  CHECK(vf.rows() == m.numVertices());
  CHECK(vf.cols() == 16);
  // Vertex normals are unit length on this mesh.
  for (int j = 0; j < m.numVertices(); ++j) {
    CHECK(vf.row(j).segment(3, 3).norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("spectral error paths") {
  Mesh m = bumpyGrid(6, 7);
  auto cache = cacheFor(m);
  CHECK_THROWS_AS(computeSpectrum(cache.laplacian, m.vertexMass, m.numVertices()), Error);
  CHECK_THROWS_AS(computeSpectrum(cache.laplacian, m.vertexMass, 1), Error);
  auto spec = computeSpectrum(cache.laplacian, m.vertexMass, 6);
  CHECK_THROWS_AS(wksSignatures(spec, spec.eigenvectors, 1, 7.0), Error);
}
