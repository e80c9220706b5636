#include "jf/operators.hpp"

#include <cmath>
#include <numbers>

namespace jf {

FrameSet buildFrames(const Mesh& mesh, FrameRule rule, uint64_t seed) {
  FrameSet out;
  out.frames.resize(mesh.numTriangles());
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    const Vec3 vj = mesh.vertices.row(mesh.triangles(t, 0));
    const Vec3 vk = mesh.vertices.row(mesh.triangles(t, 1));
    const Vec3 n = mesh.normals.row(t);
    Vec3 c1 = (vk - vj).normalized();
    Vec3 c2 = n.cross(c1);
    if (rule == FrameRule::RandomizedRotation) {
      Rng rng = Rng::forStream(seed, static_cast<uint64_t>(t));
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3 r1 = std::cos(a) * c1 + std::sin(a) * c2;
      const Vec3 r2 = n.cross(r1);
      c1 = r1;
      c2 = r2;
    }
    out.frames[t].col(0) = c1;
    out.frames[t].col(1) = c2;
  }
  return out;
}

SpMatRM buildGradient(const Mesh& mesh, const FrameSet& frames) {
  const int T = mesh.numTriangles();
  if (frames.size() != T) throw Error::validation("frame count does not match triangle count");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(T) * 6);
  for (int t = 0; t < T; ++t) {
    const int j = mesh.triangles(t, 0), k = mesh.triangles(t, 1), l = mesh.triangles(t, 2);
    const Vec3 vj = mesh.vertices.row(j);
    const Vec3 vk = mesh.vertices.row(k);
    const Vec3 vl = mesh.vertices.row(l);
    Mat2 E;  // edge vectors in frame coordinates
    E.col(0) = frames.frames[t].transpose() * (vk - vj);
    E.col(1) = frames.frames[t].transpose() * (vl - vj);
    Mat23 D;
    D << -1, 1, 0, -1, 0, 1;
    // Gradient of the linear interpolant: solve E^T u = differences.
    const Mat23 G = E.transpose().inverse() * D;
    for (int r = 0; r < 2; ++r) {
      trips.emplace_back(2 * t + r, j, G(r, 0));
      trips.emplace_back(2 * t + r, k, G(r, 1));
      trips.emplace_back(2 * t + r, l, G(r, 2));
    }
  }
  SpMatRM grad(2 * T, mesh.numVertices());
  grad.setFromTriplets(trips.begin(), trips.end());
  return grad;
}

MassAndLaplacian buildLaplacian(const Mesh& mesh, const SpMatRM& grad) {
  const int T = mesh.numTriangles();
  MassAndLaplacian out;
  out.massDiag.resize(2 * T);
  for (int t = 0; t < T; ++t) {
    out.massDiag(2 * t) = mesh.areas(t);
    out.massDiag(2 * t + 1) = mesh.areas(t);
  }
  const SpMat gradCM = grad;
  out.laplacian = gradCM.transpose() * out.massDiag.asDiagonal() * gradCM;
  out.laplacian.prune(0.0);
  return out;
}

namespace {

SpMat deleteRowCol(const SpMat& m, int pin) {
  const int n = static_cast<int>(m.rows());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(m.nonZeros());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (it.row() == pin || it.col() == pin) continue;
      const int r = it.row() > pin ? static_cast<int>(it.row()) - 1 : static_cast<int>(it.row());
      const int c = it.col() > pin ? static_cast<int>(it.col()) - 1 : static_cast<int>(it.col());
      trips.emplace_back(r, c, it.value());
    }
  }
  SpMat out(n - 1, n - 1);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

PinnedSolver::PinnedSolver(const SpMat& laplacian, int pinVertex)
    : pin_(pinVertex), n_(static_cast<int>(laplacian.rows())) {
  if (pin_ < 0 || pin_ >= n_) throw Error::validation("pin vertex out of range");
  SpMat reduced = deleteRowCol(laplacian, pin_);
  reduced.makeCompressed();
  lu_.compute(reduced);
  if (lu_.info() != Eigen::Success) {
    throw Error::numeric("pinned Laplacian factorization failed (disconnected mesh?)");
  }
}

MatX PinnedSolver::solve(const MatX& rhsFull) const {
  if (rhsFull.rows() != n_) throw Error::validation("solve: right-hand side has wrong height");
  MatX rhs(n_ - 1, rhsFull.cols());
  rhs.topRows(pin_) = rhsFull.topRows(pin_);
  rhs.bottomRows(n_ - 1 - pin_) = rhsFull.bottomRows(n_ - 1 - pin_);
  MatX reduced;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    reduced = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw Error::numeric("pinned solve failed");
  }
  MatX full(n_, rhsFull.cols());
  full.topRows(pin_) = reduced.topRows(pin_);
  full.row(pin_).setZero();
  full.bottomRows(n_ - 1 - pin_) = reduced.bottomRows(n_ - 1 - pin_);
  return full;
}

OperatorCache buildOperatorCache(std::shared_ptr<const Mesh> mesh, FrameRule rule,
                                 uint64_t frameSeed, int pinVertex) {
  OperatorCache cache;
  cache.mesh = std::move(mesh);
  cache.frames = buildFrames(*cache.mesh, rule, frameSeed);
  cache.grad = buildGradient(*cache.mesh, cache.frames);
  auto ml = buildLaplacian(*cache.mesh, cache.grad);
  cache.massDiag = std::move(ml.massDiag);
  cache.laplacian = std::move(ml.laplacian);
  cache.pinVertex = pinVertex;
  cache.solver = std::make_shared<PinnedSolver>(cache.laplacian, pinVertex);
  return cache;
}

}  // namespace jf
