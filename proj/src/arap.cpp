#include "jf/arap.hpp"

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <unordered_set>

namespace jf {

Mat3 fitRotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Mat2 fitRotation2x2(const Mat2& m) {
  const double x = m(0, 0) + m(1, 1);
  const double y = m(1, 0) - m(0, 1);
  const double r = std::sqrt(x * x + y * y);
  Mat2 q = Mat2::Identity();
  if (r > 1e-30) {
    const double c = x / r, s = y / r;
    q << c, -s, s, c;
  }
  return q;
}

namespace {

// Edge (a, b) of triangle t, seen from every cell of t with 1/3 of the
// halfedge cotangent weight. Corner c is opposite the edge (c+1, c+2).
struct TriEdge {
  int a, b;
  double w;  // 0.5 cot(opposite)
};

std::array<TriEdge, 3> triangleEdges(const Mesh& mesh, const MatX& cornerCot, int t) {
  std::array<TriEdge, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c] = {mesh.triangles(t, (c + 1) % 3), mesh.triangles(t, (c + 2) % 3), cornerCot(t, c)};
  }
  return out;
}

}  // namespace

ArapSolver::ArapSolver(std::shared_ptr<const Mesh> mesh, std::vector<int> handleIndices)
    : mesh_(std::move(mesh)), handles_(std::move(handleIndices)) {
  const Mesh& m = *mesh_;
  const int V = m.numVertices();

  if (handles_.size() < 2) throw Error::validation("ARAP needs at least 2 handles");
  std::unordered_set<int> seen;
  for (int h : handles_) {
    if (h < 0 || h >= V) throw Error::validation("handle index out of range");
    if (!seen.insert(h).second) throw Error::validation("duplicate handle index");
  }

  cornerCot_.resize(m.numTriangles(), 3);
  for (int t = 0; t < m.numTriangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const Vec3 p = m.vertices.row(m.triangles(t, c));
      const Vec3 q = m.vertices.row(m.triangles(t, (c + 1) % 3));
      const Vec3 r = m.vertices.row(m.triangles(t, (c + 2) % 3));
      const Vec3 e1 = q - p, e2 = r - p;
      cornerCot_(t, c) = 0.5 * e1.dot(e2) / e1.cross(e2).norm();
    }
  }

  // Quadratic form of the cell energy: the cotangent Laplacian with positive
  // diagonal.
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < m.numTriangles(); ++t) {
    for (const auto& e : triangleEdges(m, cornerCot_, t)) {
      trips.emplace_back(e.a, e.b, -e.w);
      trips.emplace_back(e.b, e.a, -e.w);
      trips.emplace_back(e.a, e.a, e.w);
      trips.emplace_back(e.b, e.b, e.w);
    }
  }
  laplacian_.resize(V, V);
  laplacian_.setFromTriplets(trips.begin(), trips.end());

  freeIndex_.assign(V, -1);
  std::vector<char> isHandle(V, 0);
  for (int h : handles_) isHandle[h] = 1;
  for (int j = 0; j < V; ++j) {
    if (!isHandle[j]) {
      freeIndex_[j] = static_cast<int>(freeList_.size());
      freeList_.push_back(j);
    }
  }
  const int nf = static_cast<int>(freeList_.size());
  const int nc = static_cast<int>(handles_.size());
  std::vector<int> handleIndex(V, -1);
  for (int i = 0; i < nc; ++i) handleIndex[handles_[i]] = i;

  std::vector<Eigen::Triplet<double>> ff, fc;
  for (int k = 0; k < laplacian_.outerSize(); ++k) {
    for (SpMat::InnerIterator it(laplacian_, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (freeIndex_[r] < 0) continue;
      if (freeIndex_[c] >= 0) {
        ff.emplace_back(freeIndex_[r], freeIndex_[c], it.value());
      } else {
        fc.emplace_back(freeIndex_[r], handleIndex[c], it.value());
      }
    }
  }
  lff_.resize(nf, nf);
  lff_.setFromTriplets(ff.begin(), ff.end());
  lfc_.resize(nf, nc);
  lfc_.setFromTriplets(fc.begin(), fc.end());
  if (nf > 0) {
    solver_.compute(lff_);
    if (solver_.info() != Eigen::Success) {
      throw Error::numeric("ARAP global-step factorization failed");
    }
  }
}

std::vector<Mat3> ArapSolver::fitCellRotations(const MatX& positions) const {
  const Mesh& m = *mesh_;
  std::vector<Mat3> cov(m.numVertices(), Mat3::Zero());
  for (int t = 0; t < m.numTriangles(); ++t) {
    for (const auto& e : triangleEdges(m, cornerCot_, t)) {
      const Vec3 src = m.vertices.row(e.a) - m.vertices.row(e.b);
      const Vec3 cur = positions.row(e.a) - positions.row(e.b);
      const Mat3 outer = (e.w / 3.0) * (cur * src.transpose());
      for (int c = 0; c < 3; ++c) cov[m.triangles(t, c)] += outer;
    }
  }
  std::vector<Mat3> rot(m.numVertices());
  for (int j = 0; j < m.numVertices(); ++j) rot[j] = fitRotation(cov[j]);
  return rot;
}

double ArapSolver::energy(const MatX& positions, const std::vector<Mat3>& rotations) const {
  const Mesh& m = *mesh_;
  double total = 0.0;
  for (int t = 0; t < m.numTriangles(); ++t) {
    for (const auto& e : triangleEdges(m, cornerCot_, t)) {
      const Vec3 src = m.vertices.row(e.a) - m.vertices.row(e.b);
      const Vec3 cur = positions.row(e.a) - positions.row(e.b);
      for (int c = 0; c < 3; ++c) {
        total += (e.w / 3.0) * (cur - rotations[m.triangles(t, c)] * src).squaredNorm();
      }
    }
  }
  return total;
}

double ArapSolver::energyOf(const MatX& positions) const {
  return energy(positions, fitCellRotations(positions));
}

MatX ArapSolver::solveGlobal(const std::vector<Mat3>& rotations, const MatX& handleTargets) const {
  const Mesh& m = *mesh_;
  MatX b = MatX::Zero(m.numVertices(), 3);
  for (int t = 0; t < m.numTriangles(); ++t) {
    const Mat3 rotSum =
        rotations[m.triangles(t, 0)] + rotations[m.triangles(t, 1)] + rotations[m.triangles(t, 2)];
    for (const auto& e : triangleEdges(m, cornerCot_, t)) {
      const Vec3 src = m.vertices.row(e.a) - m.vertices.row(e.b);
      const Vec3 rhs = (e.w / 3.0) * (rotSum * src);
      b.row(e.a) += rhs.transpose();
      b.row(e.b) -= rhs.transpose();
    }
  }

  MatX out(m.numVertices(), 3);
  for (size_t i = 0; i < handles_.size(); ++i) out.row(handles_[i]) = handleTargets.row(i);
  if (!freeList_.empty()) {
    MatX bf(freeList_.size(), 3);
    for (size_t i = 0; i < freeList_.size(); ++i) bf.row(i) = b.row(freeList_[i]);
    bf -= lfc_ * handleTargets;
    MatX xf;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      xf = solver_.solve(bf);
    }
    for (size_t i = 0; i < freeList_.size(); ++i) out.row(freeList_[i]) = xf.row(i);
  }
  return out;
}

ArapResult ArapSolver::deform(const MatX& handleTargets, int iters, double tol) const {
  const Mesh& m = *mesh_;
  if (static_cast<int>(handles_.size()) != handleTargets.rows() || handleTargets.cols() != 3) {
    throw Error::validation("handle target shape mismatch");
  }
  if (iters < 1) throw Error::validation("ARAP needs at least one iteration");

  // Warm start: best-fit rigid motion of the handles. Rigid target
  // configurations converge in one iteration this way.
  MatX rest(handles_.size(), 3);
  for (size_t i = 0; i < handles_.size(); ++i) rest.row(i) = m.vertices.row(handles_[i]);
  const Vec3 restMean = rest.colwise().mean();
  const Vec3 targetMean = handleTargets.colwise().mean();
  Mat3 cov = Mat3::Zero();
  for (long i = 0; i < rest.rows(); ++i) {
    cov += (handleTargets.row(i).transpose() - targetMean) *
           (rest.row(i).transpose() - restMean).transpose();
  }
  const Mat3 rigid = fitRotation(cov);
  MatX positions = (m.vertices.rowwise() - restMean.transpose()) * rigid.transpose();
  positions.rowwise() += targetMean.transpose();
  for (size_t i = 0; i < handles_.size(); ++i) positions.row(handles_[i]) = handleTargets.row(i);

  ArapResult result;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    const auto rotations = fitCellRotations(positions);
    positions = solveGlobal(rotations, handleTargets);
    const double e = energy(positions, rotations);
    result.energyTrace.push_back(e);
    result.iterations = it + 1;
    if (std::isfinite(prev) && prev - e <= tol * std::max(prev, 1e-300)) break;
    prev = e;
  }
  result.positions = std::move(positions);
  return result;
}

ArapResult arapDeform(const Mesh& mesh, const HandleSet& handles, int iters, double tol) {
  ArapSolver solver(std::make_shared<Mesh>(mesh), handles.indices);
  return solver.deform(handles.targets, iters, tol);
}

}  // namespace jf
