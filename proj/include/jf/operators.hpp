#pragma once

#include "jf/mesh.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <mutex>
#include <optional>

namespace jf {

// Oriented orthonormal tangent bases, one 3x2 matrix per triangle.
struct FrameSet {
  std::vector<Mat32> frames;
  int size() const { return static_cast<int>(frames.size()); }
};

// Deterministic default: column 1 along the triangle's first edge. The
// pipeline is invariant to this choice; RandomizedRotation exists so tests
// can exercise that invariance.
enum class FrameRule { FirstEdge, RandomizedRotation };

FrameSet buildFrames(const Mesh& mesh, FrameRule rule = FrameRule::FirstEdge, uint64_t seed = 0);

// Stacked per-triangle gradient operator, 2T x V. Rows (2i, 2i+1) express
// gradients in the columns of frame i: applying it to a V x d map gives the
// transposed jacobians as a 2T x d stack.
SpMatRM buildGradient(const Mesh& mesh, const FrameSet& frames);

// Mass diagonal (2T, triangle area repeated twice) and L = grad^T A grad.
struct MassAndLaplacian {
  VecX massDiag;
  SpMat laplacian;
};
MassAndLaplacian buildLaplacian(const Mesh& mesh, const SpMatRM& grad);

// Sparse LU of the Laplacian with the pin vertex's row/column deleted.
// solve() maps a full-height right-hand side to the solution with
// x[pin] = 0; concurrent calls are serialized internally, so results are
// identical to serial execution.
class PinnedSolver {
 public:
  PinnedSolver(const SpMat& laplacian, int pinVertex);

  MatX solve(const MatX& rhsFull) const;
  int pinVertex() const { return pin_; }
  int fullSize() const { return n_; }

 private:
  int pin_ = 0;
  int n_ = 0;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  mutable std::mutex mutex_;
};

struct SpectralData;  // spectral.hpp

// Everything the preprocessing pass produces for one mesh.
struct OperatorCache {
  std::shared_ptr<const Mesh> mesh;
  FrameSet frames;
  SpMatRM grad;      // 2T x V
  VecX massDiag;     // 2T
  SpMat laplacian;   // V x V
  int pinVertex = 0;
  std::shared_ptr<const PinnedSolver> solver;
  std::shared_ptr<const SpectralData> spectrum;  // optional

  const Mesh& meshRef() const { return *mesh; }
};

OperatorCache buildOperatorCache(std::shared_ptr<const Mesh> mesh,
                                 FrameRule rule = FrameRule::FirstEdge, uint64_t frameSeed = 0,
                                 int pinVertex = 0);

}  // namespace jf
