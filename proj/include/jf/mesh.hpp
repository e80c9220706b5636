#pragma once

#include "jf/common.hpp"

namespace jf {

// Immutable 2-manifold triangle mesh with derived per-element geometry.
// Construction validates: indices in range, no degenerate triangles,
// globally consistent counterclockwise winding, edge- and vertex-manifold,
// single connected component. Boundaries (disk topology) are allowed.
struct Mesh {
  MatX vertices;    // V x 3
  MatXi triangles;  // T x 3, counterclockwise

  // Derived, populated by build().
  VecX areas;       // T
  MatX normals;     // T x 3, unit
  MatX centroids;   // T x 3
  VecX vertexMass;  // V, barycentric lumping: 1/3 of incident triangle area
  double bboxDiag = 0.0;

  int numVertices() const { return static_cast<int>(vertices.rows()); }
  int numTriangles() const { return static_cast<int>(triangles.rows()); }
  double totalArea() const { return areas.sum(); }

  static Mesh build(MatX vertices, MatXi triangles);
};

// Topology summary used by the disk-patch oracle and validation.
struct MeshTopology {
  long edgeCount = 0;
  long boundaryEdgeCount = 0;
  std::vector<std::vector<int>> boundaryLoops;  // each loop in walk order
  long eulerCharacteristic = 0;

  bool isDisk() const { return boundaryLoops.size() == 1 && eulerCharacteristic == 1; }
  bool isClosed() const { return boundaryEdgeCount == 0; }
};

MeshTopology analyzeTopology(const Mesh& mesh);

// Rescales so the farthest vertex from the area-weighted centroid sits at
// distance 1 from the origin. Returns the applied scale and the removed
// center; the inverse map is v -> v / scale + center.
struct NormalizeResult {
  Mesh mesh;
  double scale = 1.0;
  Vec3 center = Vec3::Zero();
};
NormalizeResult normalizeToUnitSphere(const Mesh& mesh);

// Same transform for bare position matrices (V x d, d = 2 or 3); masses come
// from the positions' own triangle areas, so degenerate elements are
// tolerated. Used by the evaluation metrics.
struct NormalizedPositions {
  MatX positions;
  double scale = 1.0;
  VecX center;
};
NormalizedPositions normalizePositions(const MatX& positions, const MatXi& triangles);

// Lumped-mass-weighted mean of per-vertex positions, with source-mesh masses.
VecX centerOfMass(const Mesh& mesh, const MatX& positions);

}  // namespace jf
