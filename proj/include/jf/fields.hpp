#pragma once

#include "jf/operators.hpp"
#include "jf/parallel.hpp"

namespace jf {

// Ambient 3x3 matrix per triangle, as predicted by the network.
using ExtrinsicField = std::vector<Mat3>;

// Tangent-space restriction R_i = P_i B_i, returned in stack layout
// (rows (2i, 2i+1) = R_i^T).
JacobianStack restrictField(const ExtrinsicField& field, const FrameSet& frames,
                            Exec exec = Exec::Parallel);

// Adjoint of restrictField for backpropagation: dP_i from the stack-layout
// upstream gradient.
ExtrinsicField restrictAdjoint(const JacobianStack& upstream, const FrameSet& frames,
                               Exec exec = Exec::Parallel);

enum class MapMode { Deform3d, Uv2d };

// Per-triangle singular values / distortion / orientation flags of a map's
// jacobians. Flips are only defined in UV mode (2x2 jacobians).
struct DistortionReport {
  VecX sigma1, sigma2;   // sigma1 >= sigma2 >= 0
  VecX distortion;       // max(sigma1, 1/sigma2); +inf when sigma2 ~ 0
  std::vector<uint8_t> flipped;
  bool flipsDefined = false;
  long countHighDistortion = 0;  // D > 10 (degenerate jacobians included)
  long countFlips = 0;
  double meanDistortion = 0.0;    // over finite entries
  double medianDistortion = 0.0;  // over finite entries
};

DistortionReport distortionReport(const OperatorCache& cache, const VertexMap& map, MapMode mode,
                                  Exec exec = Exec::Parallel);

// Table-style aggregate over a collection of per-mesh reports.
struct DistortionSummary {
  double avgD10 = 0.0;              // mean per-mesh count of D > 10 triangles
  double medD10 = 0.0;              // median of the same counts
  double avgFlips = 0.0;            // mean per-mesh flipped-triangle count
  double pctMeshesWithFlips = 0.0;  // percentage of meshes with >= 1 flip
};

DistortionSummary summarizeDistortion(const std::vector<DistortionReport>& reports);

}  // namespace jf
