#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jf/operators.hpp"
#include "jf/poisson.hpp"
#include "testutil.hpp"

#include <Eigen/Dense>

#include <thread>

using namespace jf;
using namespace jftest;

namespace {

// Independent oracle: textbook cotangent Laplacian assembled edge by edge.
// Kept free of any library assembly path on purpose.
SpMat cotangentLaplacianOracle(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    const int i0 = mesh.triangles(t, 0), i1 = mesh.triangles(t, 1), i2 = mesh.triangles(t, 2);
    const Vec3 p0 = mesh.vertices.row(i0), p1 = mesh.vertices.row(i1), p2 = mesh.vertices.row(i2);
    const int idx[3] = {i0, i1, i2};
    const Vec3 pos[3] = {p0, p1, p2};
    for (int c = 0; c < 3; ++c) {
      const Vec3 a = pos[(c + 1) % 3] - pos[c];
      const Vec3 b = pos[(c + 2) % 3] - pos[c];
      const double cot = a.dot(b) / a.cross(b).norm();
      const int u = idx[(c + 1) % 3], v = idx[(c + 2) % 3];
      trips.emplace_back(u, v, -0.5 * cot);
      trips.emplace_back(v, u, -0.5 * cot);
      trips.emplace_back(u, u, 0.5 * cot);
      trips.emplace_back(v, v, 0.5 * cot);
    }
  }
  SpMat L(mesh.numVertices(), mesh.numVertices());
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

Mesh rotated(const Mesh& m, const Mat3& q) {
  return Mesh::build(m.vertices * q.transpose(), m.triangles);
}

}  // namespace

TEST_CASE("frames: axis-aligned triangle") {
  Mesh m = singleTriangle();
  auto frames = buildFrames(m);
  CHECK((frames.frames[0].col(0) - Vec3(1, 0, 0)).norm() < 1e-14);
  CHECK((frames.frames[0].col(1) - Vec3(0, 1, 0)).norm() < 1e-14);
}

TEST_CASE("frames: yz-plane triangle hand values") {
  MatX v(3, 3);
  v << 0, 0, 0, 0, 2, 0, 0, 0, 2;
  MatXi f(1, 3);
  f << 0, 1, 2;
  Mesh m = Mesh::build(v, f);
  auto frames = buildFrames(m);
  CHECK((frames.frames[0].col(0) - Vec3(0, 1, 0)).norm() < 1e-14);
  CHECK((frames.frames[0].col(1) - Vec3(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("frames: orthonormal, tangent, oriented; rotation-equivariant") {
  Rng rng(11);
  Mesh m = bumpyGrid(10, 5);
  const Mat3 q = randomRotation(rng);
  Mesh mq = rotated(m, q);
  auto fa = buildFrames(m);
  auto fb = buildFrames(mq);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const Mat32& B = fa.frames[t];
    CHECK((B.transpose() * B - Mat2::Identity()).norm() < 1e-12);
    const Vec3 n = m.normals.row(t);
    CHECK(std::abs(B.col(0).dot(n)) < 1e-12);
    CHECK(std::abs(B.col(1).dot(n)) < 1e-12);
    CHECK(B.col(0).cross(B.col(1)).dot(n) > 0.0);
    CHECK((fb.frames[t] - q * B).norm() < 1e-12);
  }
}

TEST_CASE("randomized frames satisfy the same invariants") {
  Mesh m = bumpyGrid(8, 6);
  auto frames = buildFrames(m, FrameRule::RandomizedRotation, 99);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const Mat32& B = frames.frames[t];
    const Vec3 n = m.normals.row(t);
    CHECK((B.transpose() * B - Mat2::Identity()).norm() < 1e-12);
    CHECK(B.col(0).cross(B.col(1)).dot(n) > 0.0);
  }
}

TEST_CASE("gradient: linear and constant functions") {
  Mesh m = singleTriangle();
  auto frames = buildFrames(m);
  auto grad = buildGradient(m, frames);

  VecX gx(3);
  gx << 0, 1, 0;  // g(x,y,z) = x at the three vertices
  VecX r = grad * gx;
  CHECK(relErr(r(0), 1.0) < 1e-12);
  CHECK(std::abs(r(1)) < 1e-12);

  VecX c = VecX::Constant(3, 7.0);
  CHECK((grad * c).norm() < 1e-10);
}

TEST_CASE("gradient rows sum to zero") {
  Mesh m = bumpyGrid(9, 3);
  auto grad = buildGradient(m, buildFrames(m));
  VecX ones = VecX::Ones(m.numVertices());
  VecX rowSums = grad * ones;
  CHECK(rowSums.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gradient of planar affine function in arbitrary frames") {
  Mesh flat = shapes::heightField(7, 7, [](double, double) { return 0.0; });
  auto frames = buildFrames(flat, FrameRule::RandomizedRotation, 4);
  auto grad = buildGradient(flat, frames);
  VecX g(flat.numVertices());
  for (int j = 0; j < flat.numVertices(); ++j) {
    g(j) = 3.0 * flat.vertices(j, 0) + 2.0 * flat.vertices(j, 1);
  }
  const Vec3 ambient(3, 2, 0);
  VecX r = grad * g;
  for (int t = 0; t < flat.numTriangles(); ++t) {
    const Vec2 expected = frames.frames[t].transpose() * ambient;
    CHECK((r.segment<2>(2 * t) - expected).norm() < 1e-10);
  }
}

TEST_CASE("laplacian: unit square and equilateral hand values") {
  Mesh sq = unitSquare();
  auto grad = buildGradient(sq, buildFrames(sq));
  auto ml = buildLaplacian(sq, grad);
  // Off-diagonal for the diagonal edge (0,2): both opposite angles are 90
  // degrees, so -(cot a + cot b)/2 = 0.
  CHECK(std::abs(MatX(ml.laplacian)(0, 2)) < 1e-12);

  Mesh eq = equilateralTriangle();
  auto mle = buildLaplacian(eq, buildGradient(eq, buildFrames(eq)));
  const double expected = -1.0 / (2.0 * std::sqrt(3.0));
  MatX Ld = MatX(mle.laplacian);
  CHECK(relErr(Ld(0, 1), expected) < 1e-12);
  CHECK(relErr(Ld(1, 2), expected) < 1e-12);
}

TEST_CASE("laplacian kills constants and is symmetric") {
  Mesh m = bumpyGrid(10, 8);
  auto ml = buildLaplacian(m, buildGradient(m, buildFrames(m)));
  VecX ones = VecX::Ones(m.numVertices());
  CHECK((ml.laplacian * ones).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((MatX(ml.laplacian) - MatX(ml.laplacian).transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("laplacian matches edge-wise cotangent assembly on random meshes") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Mesh m = bumpyGrid(8, seed);
    auto ml = buildLaplacian(m, buildGradient(m, buildFrames(m)));
    SpMat oracle = cotangentLaplacianOracle(m);
    CHECK(relErr(MatX(ml.laplacian), MatX(oracle)) < 1e-9);
  }
}

TEST_CASE("laplacian is frame-choice independent") {
  Mesh m = bumpyGrid(9, 12);
  auto a = buildLaplacian(m, buildGradient(m, buildFrames(m)));
  auto b = buildLaplacian(m, buildGradient(m, buildFrames(m, FrameRule::RandomizedRotation, 7)));
  CHECK(relErr(MatX(a.laplacian), MatX(b.laplacian)) < 1e-12);
}

TEST_CASE("pinned solver: inverse consistency and zero") {
  Mesh m = bumpyGrid(9, 21);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(m));
  Rng rng(5);
  MatX y(m.numVertices(), 3);
  for (int j = 0; j < y.rows(); ++j) {
    for (int c = 0; c < 3; ++c) y(j, c) = rng.normal();
  }
  MatX b = cache.laplacian * y;
  MatX x = cache.solver->solve(b);
  MatX expected = y.rowwise() - y.row(cache.pinVertex);
  CHECK(relErr(x, expected) < 1e-9);

  MatX zero = MatX::Zero(m.numVertices(), 2);
  CHECK(cache.solver->solve(zero).norm() == 0.0);
}

TEST_CASE("pinned solver matches dense elimination on the square") {
  Mesh sq = unitSquare();
  auto cache = buildOperatorCache(std::make_shared<Mesh>(sq));
  VecX b(4);
  b << 0.3, -1.2, 0.9, 0.25;
  // Dense oracle: delete row/col 0, solve with full-pivot LU.
  MatX Ld = MatX(cache.laplacian);
  MatX reduced = Ld.block(1, 1, 3, 3);
  VecX rhs = b.tail(3);
  VecX xr = reduced.fullPivLu().solve(rhs);
  MatX x = cache.solver->solve(b);
  CHECK(std::abs(x(0, 0)) == 0.0);
  CHECK((x.col(0).tail(3) - xr).norm() < 1e-12);
}

TEST_CASE("factorization residual contract") {
  for (uint64_t seed : {31, 32}) {
    Mesh m = bumpyGrid(10, seed);
    auto cache = buildOperatorCache(std::make_shared<Mesh>(m));
    Rng rng(seed);
    VecX g(m.numVertices());
    for (int j = 0; j < g.rows(); ++j) g(j) = rng.normal();
    g(cache.pinVertex) = 0.0;
    VecX x = cache.solver->solve(g);
    VecX resid = cache.laplacian * x - g;
    resid(cache.pinVertex) = 0.0;  // pinned row carries the discarded constraint force
    CHECK(resid.norm() / g.norm() < 1e-10);
  }
}

TEST_CASE("concurrent solves match serial solves") {
  Mesh m = bumpyGrid(10, 44);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(m));
  std::vector<MatX> rhs;
  Rng rng(9);
  for (int i = 0; i < 8; ++i) {
    MatX b(m.numVertices(), 3);
    for (int j = 0; j < b.rows(); ++j) {
      for (int c = 0; c < 3; ++c) b(j, c) = rng.normal();
    }
    rhs.push_back(b);
  }
  std::vector<MatX> serial;
  for (const auto& b : rhs) serial.push_back(cache.solver->solve(b));
  std::vector<MatX> parallel(rhs.size());
  std::vector<std::thread> threads;
  for (size_t i = 0; i < rhs.size(); ++i) {
    threads.emplace_back([&, i] { parallel[i] = cache.solver->solve(rhs[i]); });
  }
  for (auto& t : threads) t.join();
  for (size_t i = 0; i < rhs.size(); ++i) {
    CHECK((serial[i] - parallel[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("affine reproduction: identity embedding gives frame blocks") {
  Mesh m = bumpyGrid(8, 51);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(m));
  JacobianStack stack = computeJacobians(cache, m.vertices);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const Mat32 J = stack.middleRows<2>(2 * t).transpose();
    CHECK((J - cache.frames.frames[t]).norm() < 1e-10);
  }
}

TEST_CASE("per-triangle jacobians match the edge-equation solve") {
  Mesh m = bumpyGrid(8, 61);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(m));
  for (uint64_t seed : {1, 2, 3}) {
    MatX psi = smoothRandomMap(m, seed);
    JacobianStack stack = computeJacobians(cache, psi);
    for (int t = 0; t < m.numTriangles(); ++t) {
      const int j = m.triangles(t, 0), k = m.triangles(t, 1), l = m.triangles(t, 2);
      Mat2 E;
      E.col(0) = cache.frames.frames[t].transpose() *
                 (m.vertices.row(k) - m.vertices.row(j)).transpose();
      E.col(1) = cache.frames.frames[t].transpose() *
                 (m.vertices.row(l) - m.vertices.row(j)).transpose();
      MatX dPhi(3, 2);
      dPhi.col(0) = (psi.row(k) - psi.row(j)).transpose();
      dPhi.col(1) = (psi.row(l) - psi.row(j)).transpose();
      const Mat32 direct = dPhi * E.inverse();  // J B^T [e1 e2] = dPhi
      const Mat32 viaGrad = stack.middleRows<2>(2 * t).transpose();
      CHECK(relErr(viaGrad, direct) < 1e-9);
    }
  }
}
