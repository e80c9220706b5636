#pragma once

#include "jf/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <mutex>

namespace jf {

struct HandleSet {
  std::vector<int> indices;  // H distinct vertex ids, H >= 2
  MatX targets;              // H x 3
};

// Nearest rotation (det +1) maximizing tr(R^T M); 3x3 Kabsch with sign
// correction.
Mat3 fitRotation(const Mat3& m);

// Nearest 2x2 rotation to a 2x2 matrix (never a reflection).
Mat2 fitRotation2x2(const Mat2& m);

struct ArapResult {
  MatX positions;                  // V x 3
  std::vector<double> energyTrace; // energy after each global step
  int iterations = 0;
};

// As-rigid-as-possible surface deformation: per-vertex-cell rotations over
// spokes-and-rims edges with cotangent weights (local step, 3x3 SVD with
// determinant correction), then a cotangent-Laplacian solve with handle rows
// eliminated (global step). The factorization depends only on the mesh and
// the handle indices, so one solver serves many target configurations.
class ArapSolver {
 public:
  ArapSolver(std::shared_ptr<const Mesh> mesh, std::vector<int> handleIndices);

  // Iterates until the relative energy decrease drops below tol or iters is
  // reached. Initialization: best-fit rigid motion of the handle targets.
  ArapResult deform(const MatX& handleTargets, int iters, double tol) const;

  // Spokes-and-rims energy of a candidate embedding with explicitly fitted
  // per-vertex rotations (the local step applied to `positions`).
  double energyOf(const MatX& positions) const;

  const std::vector<int>& handles() const { return handles_; }

 private:
  std::vector<Mat3> fitCellRotations(const MatX& positions) const;
  double energy(const MatX& positions, const std::vector<Mat3>& rotations) const;
  MatX solveGlobal(const std::vector<Mat3>& rotations, const MatX& handleTargets) const;

  std::shared_ptr<const Mesh> mesh_;
  std::vector<int> handles_;
  std::vector<int> freeIndex_;   // V entries: index into the free block or -1
  std::vector<int> freeList_;
  MatX cornerCot_;               // T x 3: 0.5 cot(angle at corner c)
  SpMat laplacian_;              // edge-weight assembly, V x V
  SpMat lff_, lfc_;
  Eigen::SimplicialLDLT<SpMat> solver_;
  mutable std::mutex mutex_;
};

// One-shot convenience wrapper.
ArapResult arapDeform(const Mesh& mesh, const HandleSet& handles, int iters, double tol);

}  // namespace jf
