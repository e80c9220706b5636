#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jf/fields.hpp"
#include "jf/poisson.hpp"
#include "testutil.hpp"

using namespace jf;
using namespace jftest;

namespace {

ExtrinsicField randomField(int count, uint64_t seed) {
  Rng rng(seed);
  ExtrinsicField field(count);
  for (auto& p : field) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p(r, c) = rng.normal();
    }
  }
  return field;
}

}  // namespace

TEST_CASE("restriction of identity and of the normal projector") {
  Mesh m = bumpyGrid(8, 2);
  auto frames = buildFrames(m);
  const int T = m.numTriangles();

  ExtrinsicField identity(T, Mat3::Identity());
  JacobianStack stack = restrictField(identity, frames);
  for (int t = 0; t < T; ++t) {
    CHECK((stack.middleRows<2>(2 * t).transpose() - frames.frames[t]).norm() < 1e-14);
  }

  ExtrinsicField projectors(T);
  for (int t = 0; t < T; ++t) {
    const Vec3 n = m.normals.row(t);
    projectors[t] = n * n.transpose();
  }
  CHECK(restrictField(projectors, frames).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("restriction agrees with the extrinsic normal-nullifying form") {
  Mesh m = bumpyGrid(9, 4);
  auto frames = buildFrames(m);
  auto field = randomField(m.numTriangles(), 17);
  JacobianStack stack = restrictField(field, frames);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const Vec3 n = m.normals.row(t);
    const Mat3 extrinsic = field[t] * (Mat3::Identity() - n * n.transpose());
    const Mat32 R = stack.middleRows<2>(2 * t).transpose();
    CHECK((R * frames.frames[t].transpose() - extrinsic).norm() < 1e-12);
  }
}

TEST_CASE("restriction is linear") {
  Mesh m = bumpyGrid(7, 5);
  auto frames = buildFrames(m);
  auto f1 = randomField(m.numTriangles(), 1);
  auto f2 = randomField(m.numTriangles(), 2);
  ExtrinsicField combo(m.numTriangles());
  for (int t = 0; t < m.numTriangles(); ++t) combo[t] = 2.0 * f1[t] - 0.5 * f2[t];
  MatX lhs = restrictField(combo, frames);
  MatX rhs = 2.0 * restrictField(f1, frames) - 0.5 * restrictField(f2, frames);
  CHECK(relErr(lhs, rhs) < 1e-13);
}

TEST_CASE("restrict adjoint is the exact transpose") {
  Mesh m = bumpyGrid(7, 6);
  auto frames = buildFrames(m);
  auto field = randomField(m.numTriangles(), 3);
  Rng rng(4);
  MatX upstream(2 * m.numTriangles(), 3);
  for (long r = 0; r < upstream.rows(); ++r) {
    for (int c = 0; c < 3; ++c) upstream(r, c) = rng.normal();
  }
  const double lhs = (restrictField(field, frames).array() * upstream.array()).sum();
  auto adj = restrictAdjoint(upstream, frames);
  double rhs = 0;
  for (int t = 0; t < m.numTriangles(); ++t) rhs += (adj[t].array() * field[t].array()).sum();
  CHECK(relErr(lhs, rhs) < 1e-12);
}

TEST_CASE("frame invariance of restriction distances and of the solve") {
  Mesh m = bumpyGrid(9, 7);
  auto cacheA = buildOperatorCache(std::make_shared<Mesh>(m));
  auto cacheB =
      buildOperatorCache(std::make_shared<Mesh>(m), FrameRule::RandomizedRotation, 1234);
  auto field = randomField(m.numTriangles(), 9);
  MatX psi = smoothRandomMap(m, 10);

  JacobianStack ra = restrictField(field, cacheA.frames);
  JacobianStack rb = restrictField(field, cacheB.frames);
  JacobianStack ja = computeJacobians(cacheA, psi);
  JacobianStack jb = computeJacobians(cacheB, psi);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const double da = (ra.middleRows<2>(2 * t) - ja.middleRows<2>(2 * t)).norm();
    const double db = (rb.middleRows<2>(2 * t) - jb.middleRows<2>(2 * t)).norm();
    CHECK(std::abs(da - db) < 1e-10);
  }

  MatX phiA = poissonSolve(cacheA, ra);
  MatX phiB = poissonSolve(cacheB, rb);
  CHECK(relErr(phiA, phiB) < 1e-8);
}

TEST_CASE("singular values are frame invariant") {
  Mesh m = bumpyGrid(8, 8);
  auto cacheA = buildOperatorCache(std::make_shared<Mesh>(m));
  auto cacheB = buildOperatorCache(std::make_shared<Mesh>(m), FrameRule::RandomizedRotation, 55);
  MatX psi = smoothRandomMap(m, 20);
  auto repA = distortionReport(cacheA, psi, MapMode::Deform3d);
  auto repB = distortionReport(cacheB, psi, MapMode::Deform3d);
  CHECK((repA.sigma1 - repB.sigma1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((repA.sigma2 - repB.sigma2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("distortion of scaling, reflection, isometry") {
  Mesh flat = bumpyGrid(8, 1, 0.0);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(flat));

  MatX doubled = 2.0 * flat.vertices.leftCols(2);
  auto rep = distortionReport(cache, doubled, MapMode::Uv2d);
  CHECK(rep.flipsDefined);
  CHECK(rep.countFlips == 0);
  CHECK((rep.sigma1.array() - 2.0).abs().maxCoeff() < 1e-10);
  CHECK((rep.sigma2.array() - 2.0).abs().maxCoeff() < 1e-10);
  CHECK((rep.distortion.array() - 2.0).abs().maxCoeff() < 1e-10);

  MatX reflected = flat.vertices.leftCols(2);
  reflected.col(0) *= -1.0;
  auto repR = distortionReport(cache, reflected, MapMode::Uv2d);
  CHECK(repR.countFlips == flat.numTriangles());

  // Rigid motion in the plane: rotation + translation.
  const double a = 0.7;
  Mat2 q;
  q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  MatX rigid = flat.vertices.leftCols(2) * q.transpose();
  rigid.rowwise() += Eigen::RowVector2d(3, -1);
  auto repI = distortionReport(cache, rigid, MapMode::Uv2d);
  CHECK((repI.distortion.array() - 1.0).abs().maxCoeff() < 1e-10);
  CHECK(repI.countFlips == 0);

  // 3D mode reports no flips.
  auto rep3 = distortionReport(cache, flat.vertices, MapMode::Deform3d);
  CHECK_FALSE(rep3.flipsDefined);
  CHECK(rep3.countFlips == 0);
}

TEST_CASE("degenerate jacobians count as high distortion") {
  Mesh flat = bumpyGrid(6, 2, 0.0);
  auto cache = buildOperatorCache(std::make_shared<Mesh>(flat));
  MatX collapsed(flat.numVertices(), 2);
  collapsed.col(0) = flat.vertices.col(0);
  collapsed.col(1).setZero();  // rank-1 map
  auto rep = distortionReport(cache, collapsed, MapMode::Uv2d);
  CHECK(rep.countHighDistortion == flat.numTriangles());
  CHECK(std::isinf(rep.distortion(0)));
}

TEST_CASE("distortion summary aggregates per-mesh counts") {
  DistortionReport a, b;
  a.countHighDistortion = 4;
  a.countFlips = 0;
  b.countHighDistortion = 0;
  b.countFlips = 2;
  auto s = summarizeDistortion({a, b});
  CHECK(s.avgD10 == doctest::Approx(2.0));
  CHECK(s.medD10 == doctest::Approx(2.0));
  CHECK(s.avgFlips == doctest::Approx(1.0));
  CHECK(s.pctMeshesWithFlips == doctest::Approx(50.0));
}
