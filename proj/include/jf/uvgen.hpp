#pragma once

#include "jf/fields.hpp"
#include "jf/mesh.hpp"

namespace jf {

// Graph distances (Dijkstra over edge lengths) from one source vertex.
VecX graphDistances(const Mesh& mesh, int source);

// Boundary mapped to the unit circle by arc length, interior solved with
// uniform Laplace weights. Bijective for disk topology (zero flips).
MatX tutteEmbed(const Mesh& mesh);

struct ParameterizeResult {
  MatX uv;                          // V x 2
  std::vector<double> energyTrace;  // sum_i |t_i| ||J_i - Q_i||_F^2 per iteration
  int iterations = 0;
};

// Local/global 2D parameterization: per-triangle jacobians projected to
// their nearest rotations, then a 2D Poisson solve. Monotone by block
// coordinate descent.
ParameterizeResult arapParameterize(const OperatorCache& cache, const MatX& initUv, int iters,
                                    double tol);

// Geodesic-ball patch around a seed vertex: keep triangles whose vertices
// lie within radius, take the largest component, require disk topology, and
// rigidly align the patch so its best-fit plane is z = 0 (mean face normal
// pointing +z) with the vertex mean at the origin.
struct PatchResult {
  Mesh mesh;
  std::vector<int> sourceVertices;  // patch vertex -> source vertex id
};
PatchResult extractDiskPatch(const Mesh& mesh, int seedVertex, double radius);

// Best rigid alignment (rotation + translation, no reflection) of `from`
// onto `to`, both N x 2.
struct Rigid2d {
  Mat2 rotation = Mat2::Identity();
  Vec2 translation = Vec2::Zero();
};
Rigid2d procrustes2d(const MatX& from, const MatX& to);
MatX applyRigid2d(const Rigid2d& transform, const MatX& points);

}  // namespace jf
