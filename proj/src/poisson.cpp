#include "jf/poisson.hpp"

namespace jf {

VertexMap poissonSolve(const OperatorCache& cache, const JacobianStack& field) {
  if (field.rows() != cache.grad.rows()) {
    throw Error::validation("jacobian stack height must be 2T");
  }
  const MatX rhs = cache.grad.transpose() * (cache.massDiag.asDiagonal() * field);
  return cache.solver->solve(rhs);
}

JacobianStack poissonAdjoint(const OperatorCache& cache, const MatX& upstream) {
  if (upstream.rows() != cache.mesh->numVertices()) {
    throw Error::validation("upstream gradient height must be V");
  }
  const MatX y = cache.solver->solve(upstream);
  return cache.massDiag.asDiagonal() * (cache.grad * y);
}

JacobianStack computeJacobians(const OperatorCache& cache, const VertexMap& map) {
  if (map.rows() != cache.mesh->numVertices()) {
    throw Error::validation("map height must be V");
  }
  return cache.grad * map;
}

}  // namespace jf
