#pragma once

#include "jf/operators.hpp"

namespace jf {

// The differentiable Poisson layer. All three maps are linear; solve and
// adjoint share the cached factorization (the pinned Laplacian is symmetric,
// so one factorization serves both directions).

// Area-weighted least-squares fit of a map to the candidate stack
// (2T x d, d = 2 or 3): minimizes sum_i |t_i| ||grad_i(map) - M_i||_F^2 with
// map[pin] = 0.
VertexMap poissonSolve(const OperatorCache& cache, const JacobianStack& field);

// Exact adjoint of poissonSolve as a linear map. The upstream gradient with
// respect to the pinned row is discarded (that output is constant zero).
JacobianStack poissonAdjoint(const OperatorCache& cache, const MatX& upstream);

// grad * map: the transposed per-triangle jacobians as a 2T x d stack.
JacobianStack computeJacobians(const OperatorCache& cache, const VertexMap& map);

}  // namespace jf
