#include "jf/uvgen.hpp"

#include "jf/poisson.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

namespace jf {

VecX graphDistances(const Mesh& mesh, int source) {
  const int V = mesh.numVertices();
  if (source < 0 || source >= V) throw Error::validation("seed vertex out of range");
  std::vector<std::vector<std::pair<int, double>>> adj(V);
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c);
      const int b = mesh.triangles(t, (c + 1) % 3);
      const double len = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
      adj[a].push_back({b, len});
      adj[b].push_back({a, len});
    }
  }
  VecX dist = VecX::Constant(V, std::numeric_limits<double>::infinity());
  dist(source) = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist(v)) continue;
    for (const auto& [u, len] : adj[v]) {
      if (d + len < dist(u)) {
        dist(u) = d + len;
        queue.push({dist(u), u});
      }
    }
  }
  return dist;
}

MatX tutteEmbed(const Mesh& mesh) {
  const auto topo = analyzeTopology(mesh);
  if (!topo.isDisk()) {
    throw Error::validation("Tutte embedding needs disk topology (got " +
                            std::to_string(topo.boundaryLoops.size()) + " boundary loops, Euler " +
                            std::to_string(topo.eulerCharacteristic) + ")");
  }
  const auto& loop = topo.boundaryLoops.front();
  const int V = mesh.numVertices();
  const int nb = static_cast<int>(loop.size());

  // Boundary on the unit circle, spaced by 3D arc length.
  VecX cumulative(nb + 1);
  cumulative(0) = 0.0;
  for (int i = 0; i < nb; ++i) {
    const int a = loop[i], b = loop[(i + 1) % nb];
    cumulative(i + 1) = cumulative(i) + (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
  }
  MatX uv = MatX::Zero(V, 2);
  std::vector<char> onBoundary(V, 0);
  for (int i = 0; i < nb; ++i) {
    const double angle = 2.0 * std::numbers::pi * cumulative(i) / cumulative(nb);
    uv.row(loop[i]) << std::cos(angle), std::sin(angle);
    onBoundary[loop[i]] = 1;
  }

  // Interior: uniform-weight Laplace system.
  std::vector<int> interiorIndex(V, -1);
  std::vector<int> interior;
  for (int j = 0; j < V; ++j) {
    if (!onBoundary[j]) {
      interiorIndex[j] = static_cast<int>(interior.size());
      interior.push_back(j);
    }
  }
  if (!interior.empty()) {
    std::map<std::pair<int, int>, char> seen;
    std::vector<Eigen::Triplet<double>> trips;
    MatX rhs = MatX::Zero(interior.size(), 2);
    VecX degree = VecX::Zero(interior.size());
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      for (int c = 0; c < 3; ++c) {
        const int a = mesh.triangles(t, c);
        const int b = mesh.triangles(t, (c + 1) % 3);
        const auto key = std::minmax(a, b);
        if (seen.emplace(key, 1).second == false) continue;
        for (const auto [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
          if (interiorIndex[u] < 0) continue;
          degree(interiorIndex[u]) += 1.0;
          if (interiorIndex[v] >= 0) {
            trips.emplace_back(interiorIndex[u], interiorIndex[v], -1.0);
          } else {
            rhs.row(interiorIndex[u]) += uv.row(v);
          }
        }
      }
    }
    for (size_t i = 0; i < interior.size(); ++i) {
      trips.emplace_back(static_cast<int>(i), static_cast<int>(i), degree(i));
    }
    SpMat A(interior.size(), interior.size());
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> solver(A);
    if (solver.info() != Eigen::Success) throw Error::numeric("Tutte system factorization failed");
    MatX x = solver.solve(rhs);
    for (size_t i = 0; i < interior.size(); ++i) uv.row(interior[i]) = x.row(i);
  }
  return uv;
}

ParameterizeResult arapParameterize(const OperatorCache& cache, const MatX& initUv, int iters,
                                    double tol) {
  const Mesh& mesh = cache.meshRef();
  if (initUv.rows() != mesh.numVertices() || initUv.cols() != 2) {
    throw Error::validation("initial UV must be V x 2");
  }
  const int T = mesh.numTriangles();

  ParameterizeResult result;
  MatX uv = initUv;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    const JacobianStack stack = computeJacobians(cache, uv);
    JacobianStack target(2 * T, 2);
    double e = 0.0;
    for (int t = 0; t < T; ++t) {
      const Mat2 J = stack.middleRows<2>(2 * t).transpose();
      const Mat2 Q = fitRotation2x2(J);
      target.middleRows<2>(2 * t) = Q.transpose();
      e += mesh.areas(t) * (J - Q).squaredNorm();
    }
    // Energy of the current map against freshly fitted rotations; record it
    // before the global step so the trace is the standard block-descent
    // sequence evaluated at (uv_k, Q_k).
    result.energyTrace.push_back(e);
    result.iterations = it + 1;
    uv = poissonSolve(cache, target);
    if (std::isfinite(prev) && prev - e <= tol * std::max(prev, 1e-300)) break;
    prev = e;
  }
  result.uv = std::move(uv);
  return result;
}

namespace {

Mat3 pcaAlignment(const MatX& vertices) {
  const Eigen::RowVector3d mean = vertices.colwise().mean();
  const MatX centered = vertices.rowwise() - mean;
  const Mat3 cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // Ascending eigenvalues: map the two dominant directions to x, y and the
  // least-variance direction to z.
  Mat3 rot;
  rot.row(0) = eig.eigenvectors().col(2).transpose();
  rot.row(1) = eig.eigenvectors().col(1).transpose();
  rot.row(2) = eig.eigenvectors().col(0).transpose();
  if (rot.determinant() < 0.0) rot.row(1) *= -1.0;
  return rot;
}

}  // namespace

PatchResult extractDiskPatch(const Mesh& mesh, int seedVertex, double radius) {
  const VecX dist = graphDistances(mesh, seedVertex);
  std::vector<char> inBall(mesh.numVertices(), 0);
  for (int j = 0; j < mesh.numVertices(); ++j) inBall[j] = dist(j) <= radius ? 1 : 0;

  std::vector<int> kept;
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    if (inBall[mesh.triangles(t, 0)] && inBall[mesh.triangles(t, 1)] &&
        inBall[mesh.triangles(t, 2)]) {
      kept.push_back(t);
    }
  }
  if (kept.empty()) throw Error::validation("patch is empty at this radius");

  // Largest edge-connected component of the kept triangles.
  std::map<std::pair<int, int>, std::vector<int>> edgeToTris;
  for (size_t i = 0; i < kept.size(); ++i) {
    const int t = kept[i];
    for (int c = 0; c < 3; ++c) {
      const auto key = std::minmax(mesh.triangles(t, c), mesh.triangles(t, (c + 1) % 3));
      edgeToTris[key].push_back(static_cast<int>(i));
    }
  }
  std::vector<int> component(kept.size(), -1);
  int numComponents = 0;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (component[i] >= 0) continue;
    std::vector<int> stack{static_cast<int>(i)};
    component[i] = numComponents;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int t = kept[cur];
      for (int c = 0; c < 3; ++c) {
        const auto key = std::minmax(mesh.triangles(t, c), mesh.triangles(t, (c + 1) % 3));
        for (int other : edgeToTris[key]) {
          if (component[other] < 0) {
            component[other] = numComponents;
            stack.push_back(other);
          }
        }
      }
    }
    ++numComponents;
  }
  std::vector<long> sizes(numComponents, 0);
  for (size_t i = 0; i < kept.size(); ++i) ++sizes[component[i]];
  const int best = static_cast<int>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  std::vector<int> oldToNew(mesh.numVertices(), -1);
  PatchResult out;
  std::vector<std::array<int, 3>> tris;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (component[i] != best) continue;
    const int t = kept[i];
    std::array<int, 3> tri;
    for (int c = 0; c < 3; ++c) {
      const int v = mesh.triangles(t, c);
      if (oldToNew[v] < 0) {
        oldToNew[v] = static_cast<int>(out.sourceVertices.size());
        out.sourceVertices.push_back(v);
      }
      tri[c] = oldToNew[v];
    }
    tris.push_back(tri);
  }

  MatX v(out.sourceVertices.size(), 3);
  for (size_t j = 0; j < out.sourceVertices.size(); ++j) {
    v.row(j) = mesh.vertices.row(out.sourceVertices[j]);
  }
  MatXi f(tris.size(), 3);
  for (size_t t = 0; t < tris.size(); ++t) f.row(t) << tris[t][0], tris[t][1], tris[t][2];

  Mesh patch = Mesh::build(v, f);  // validation failures propagate as rejections
  const auto topo = analyzeTopology(patch);
  if (!topo.isDisk()) {
    throw Error::validation("patch is not a disk (Euler " +
                            std::to_string(topo.eulerCharacteristic) + ", " +
                            std::to_string(topo.boundaryLoops.size()) + " boundary loops)");
  }

  const Mat3 rot = pcaAlignment(patch.vertices);
  const Eigen::RowVector3d mean = patch.vertices.colwise().mean();
  MatX aligned = (patch.vertices.rowwise() - mean) * rot.transpose();
  Mesh alignedPatch = Mesh::build(aligned, patch.triangles);

  // Point the area-weighted mean normal along +z (rotate half a turn about x
  // if needed; keeps the determinant +1).
  Vec3 meanNormal = Vec3::Zero();
  for (int t = 0; t < alignedPatch.numTriangles(); ++t) {
    meanNormal += alignedPatch.areas(t) * alignedPatch.normals.row(t).transpose();
  }
  if (meanNormal.z() < 0.0) {
    MatX flipped = alignedPatch.vertices;
    flipped.col(1) *= -1.0;
    flipped.col(2) *= -1.0;
    alignedPatch = Mesh::build(flipped, alignedPatch.triangles);
  }
  out.mesh = std::move(alignedPatch);
  return out;
}

Rigid2d procrustes2d(const MatX& from, const MatX& to) {
  if (from.rows() != to.rows() || from.cols() != 2 || to.cols() != 2) {
    throw Error::validation("procrustes2d expects matching N x 2 inputs");
  }
  const Eigen::RowVector2d fromMean = from.colwise().mean();
  const Eigen::RowVector2d toMean = to.colwise().mean();
  Mat2 cov = Mat2::Zero();
  for (long i = 0; i < from.rows(); ++i) {
    cov += (to.row(i) - toMean).transpose() * (from.row(i) - fromMean);
  }
  Rigid2d result;
  result.rotation = fitRotation2x2(cov);
  result.translation = toMean.transpose() - result.rotation * fromMean.transpose();
  return result;
}

MatX applyRigid2d(const Rigid2d& transform, const MatX& points) {
  MatX out = points * transform.rotation.transpose();
  out.rowwise() += transform.translation.transpose();
  return out;
}

}  // namespace jf
