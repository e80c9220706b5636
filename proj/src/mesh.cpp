#include "jf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace jf {

namespace {

inline uint64_t edgeKey(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void validateIndices(const MatX& vertices, const MatXi& triangles) {
  const int v = static_cast<int>(vertices.rows());
  for (int t = 0; t < triangles.rows(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int idx = triangles(t, c);
      if (idx < 0 || idx >= v) {
        throw Error::validation("triangle " + std::to_string(t) + " references vertex " +
                                std::to_string(idx) + " outside [0, " + std::to_string(v) + ")");
      }
    }
    if (triangles(t, 0) == triangles(t, 1) || triangles(t, 1) == triangles(t, 2) ||
        triangles(t, 0) == triangles(t, 2)) {
      throw Error::validation("triangle " + std::to_string(t) + " repeats a vertex index");
    }
  }
  for (int j = 0; j < vertices.rows(); ++j) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(vertices(j, c))) {
        throw Error::validation("vertex " + std::to_string(j) + " has a non-finite coordinate");
      }
    }
  }
}

// Directed edges must be unique. A repeated directed edge means either a
// non-manifold edge (three or more faces) or two faces wound the same way
// around a shared edge.
void validateOrientationAndEdgeManifold(const MatXi& triangles) {
  std::unordered_set<uint64_t> seen;
  seen.reserve(triangles.rows() * 3 * 2);
  for (int t = 0; t < triangles.rows(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = triangles(t, c);
      const int b = triangles(t, (c + 1) % 3);
      if (!seen.insert(edgeKey(a, b)).second) {
        throw Error::validation("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") of triangle " + std::to_string(t) +
                                " repeats with the same winding (non-manifold or inconsistent "
                                "orientation)");
      }
    }
  }
}

// Triangles incident to a vertex must form exactly one fan.
void validateVertexManifold(const MatXi& triangles, int numVertices) {
  std::vector<std::vector<int>> incident(numVertices);
  for (int t = 0; t < triangles.rows(); ++t) {
    for (int c = 0; c < 3; ++c) incident[triangles(t, c)].push_back(t);
  }
  for (int v = 0; v < numVertices; ++v) {
    const auto& tris = incident[v];
    if (tris.size() <= 1) continue;
    // Union incident triangles through shared edges (v, u).
    std::unordered_map<int, int> firstTriAtEdge;  // neighbor u -> local index
    UnionFind uf(static_cast<int>(tris.size()));
    for (size_t k = 0; k < tris.size(); ++k) {
      const int t = tris[k];
      for (int c = 0; c < 3; ++c) {
        if (triangles(t, c) != v) continue;
        const int u1 = triangles(t, (c + 1) % 3);
        const int u2 = triangles(t, (c + 2) % 3);
        for (int u : {u1, u2}) {
          auto [it, inserted] = firstTriAtEdge.try_emplace(u, static_cast<int>(k));
          if (!inserted) uf.unite(it->second, static_cast<int>(k));
        }
      }
    }
    const int root = uf.find(0);
    for (size_t k = 1; k < tris.size(); ++k) {
      if (uf.find(static_cast<int>(k)) != root) {
        throw Error::validation("vertex " + std::to_string(v) +
                                " is non-manifold (incident triangles form multiple fans)");
      }
    }
  }
}

void validateConnected(const MatXi& triangles, int numVertices) {
  if (numVertices == 0) throw Error::validation("mesh has no vertices");
  std::vector<std::vector<int>> adj(numVertices);
  for (int t = 0; t < triangles.rows(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = triangles(t, c);
      const int b = triangles(t, (c + 1) % 3);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  }
  std::vector<char> visited(numVertices, 0);
  std::queue<int> queue;
  queue.push(0);
  visited[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop();
    for (int b : adj[a]) {
      if (!visited[b]) {
        visited[b] = 1;
        ++count;
        queue.push(b);
      }
    }
  }
  if (count != numVertices) {
    throw Error::validation("mesh has multiple connected components (or isolated vertices): " +
                            std::to_string(count) + " of " + std::to_string(numVertices) +
                            " vertices reachable from vertex 0");
  }
}

}  // namespace

Mesh Mesh::build(MatX vertices, MatXi triangles) {
  if (vertices.cols() != 3) throw Error::validation("vertex array must be V x 3");
  if (triangles.cols() != 3) throw Error::validation("triangle array must be T x 3");
  if (triangles.rows() == 0) throw Error::validation("mesh has no triangles");

  validateIndices(vertices, triangles);

  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);

  const Vec3 lo = m.vertices.colwise().minCoeff();
  const Vec3 hi = m.vertices.colwise().maxCoeff();
  m.bboxDiag = (hi - lo).norm();
  const double areaEpsilon = 1e-12 * m.bboxDiag * m.bboxDiag;

  const int T = m.numTriangles();
  m.areas.resize(T);
  m.normals.resize(T, 3);
  m.centroids.resize(T, 3);
  for (int t = 0; t < T; ++t) {
    const Vec3 a = m.vertices.row(m.triangles(t, 0));
    const Vec3 b = m.vertices.row(m.triangles(t, 1));
    const Vec3 c = m.vertices.row(m.triangles(t, 2));
    const Vec3 cross = (b - a).cross(c - a);
    const double doubleArea = cross.norm();
    m.areas(t) = 0.5 * doubleArea;
    if (!(m.areas(t) > areaEpsilon)) {
      throw Error::validation("triangle " + std::to_string(t) + " is degenerate (area " +
                              std::to_string(m.areas(t)) + ")");
    }
    m.normals.row(t) = cross / doubleArea;
    m.centroids.row(t) = (a + b + c) / 3.0;
  }

  validateOrientationAndEdgeManifold(m.triangles);
  validateVertexManifold(m.triangles, m.numVertices());
  validateConnected(m.triangles, m.numVertices());

  // Fixed summation order keeps masses reproducible.
  m.vertexMass = VecX::Zero(m.numVertices());
  for (int t = 0; t < T; ++t) {
    const double third = m.areas(t) / 3.0;
    for (int c = 0; c < 3; ++c) m.vertexMass(m.triangles(t, c)) += third;
  }
  return m;
}

MeshTopology analyzeTopology(const Mesh& mesh) {
  MeshTopology topo;
  std::unordered_set<uint64_t> directed;
  directed.reserve(mesh.numTriangles() * 6);
  std::map<std::pair<int, int>, int> undirectedCount;
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c);
      const int b = mesh.triangles(t, (c + 1) % 3);
      directed.insert(edgeKey(a, b));
      undirectedCount[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  topo.edgeCount = static_cast<long>(undirectedCount.size());
  topo.eulerCharacteristic = mesh.numVertices() - topo.edgeCount + mesh.numTriangles();

  // Boundary directed edges have no reverse partner. With a manifold mesh
  // each boundary vertex starts exactly one boundary edge, so loops can be
  // walked by successor lookup. Loop start = smallest vertex for determinism.
  std::map<int, int> next;  // ordered so loop discovery is deterministic
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c);
      const int b = mesh.triangles(t, (c + 1) % 3);
      if (!directed.count(edgeKey(b, a))) next[a] = b;
    }
  }
  topo.boundaryEdgeCount = static_cast<long>(next.size());
  std::unordered_set<int> used;
  for (const auto& [start, firstNext] : next) {
    if (used.count(start)) continue;
    std::vector<int> loop;
    int v = start;
    do {
      loop.push_back(v);
      used.insert(v);
      auto it = next.find(v);
      if (it == next.end()) {
        throw Error::validation("boundary walk broke at vertex " + std::to_string(v));
      }
      v = it->second;
    } while (v != start);
    topo.boundaryLoops.push_back(std::move(loop));
  }
  return topo;
}

NormalizeResult normalizeToUnitSphere(const Mesh& mesh) {
  const VecX center = centerOfMass(mesh, mesh.vertices);
  double maxDist = 0.0;
  for (int j = 0; j < mesh.numVertices(); ++j) {
    maxDist = std::max(maxDist, (mesh.vertices.row(j).transpose() - center).norm());
  }
  if (maxDist <= 0.0) throw Error::numeric("zero-extent mesh cannot be normalized");
  NormalizeResult out;
  out.scale = 1.0 / maxDist;
  out.center = center;
  MatX v = (mesh.vertices.rowwise() - center.transpose()) * out.scale;
  out.mesh = Mesh::build(std::move(v), mesh.triangles);
  return out;
}

NormalizedPositions normalizePositions(const MatX& positions, const MatXi& triangles) {
  const int d = static_cast<int>(positions.cols());
  if (d != 2 && d != 3) throw Error::validation("positions must be V x 2 or V x 3");
  MatX p3 = MatX::Zero(positions.rows(), 3);
  p3.leftCols(d) = positions;

  VecX mass = VecX::Zero(positions.rows());
  for (int t = 0; t < triangles.rows(); ++t) {
    const Vec3 a = p3.row(triangles(t, 0));
    const Vec3 b = p3.row(triangles(t, 1));
    const Vec3 c = p3.row(triangles(t, 2));
    const double third = 0.5 * (b - a).cross(c - a).norm() / 3.0;
    for (int k = 0; k < 3; ++k) mass(triangles(t, k)) += third;
  }
  const double total = mass.sum();
  if (total <= 0.0) throw Error::numeric("positions span zero area; cannot normalize");

  VecX center = (positions.transpose() * mass) / total;
  MatX centered = positions.rowwise() - center.transpose();
  const double maxDist = centered.rowwise().norm().maxCoeff();
  if (maxDist <= 0.0) throw Error::numeric("all positions coincide; cannot normalize");

  NormalizedPositions out;
  out.scale = 1.0 / maxDist;
  out.center = center;
  out.positions = centered * out.scale;
  return out;
}

VecX centerOfMass(const Mesh& mesh, const MatX& positions) {
  if (positions.rows() != mesh.numVertices()) {
    throw Error::validation("positions row count does not match vertex count");
  }
  return (positions.transpose() * mesh.vertexMass) / mesh.vertexMass.sum();
}

}  // namespace jf
