#pragma once

#include "jf/operators.hpp"
#include "jf/parallel.hpp"

namespace jf {

// Smallest-k eigenpairs of the generalized problem L phi = lambda Abar phi,
// where Abar is the diagonal lumped vertex-mass matrix. Eigenvectors are
// Abar-orthonormal; signs are fixed by making each vector's
// largest-magnitude entry positive.
struct SpectralData {
  VecX eigenvalues;   // k, ascending, eigenvalues(0) ~ 0
  MatX eigenvectors;  // V x k
  int count() const { return static_cast<int>(eigenvalues.size()); }
};

// Dense symmetric path (the lumped mass reduces the generalized problem to a
// standard one); intended for desk-scale meshes, V <= 3000.
SpectralData computeSpectrum(const SpMat& laplacian, const VecX& vertexMass, int k);

struct FeatureConfig {
  int wksSamples = 50;        // w; 0 disables the WKS block
  int eigenCount = 64;        // k
  double sigmaFactor = 7.0;   // WKS variance = (sigmaFactor * grid spacing)^2
};

// WKS at arbitrary points given the eigenvector values there (N x k rows of
// phi). Energies are sampled uniformly in [log lambda_2, log lambda_k].
MatX wksSignatures(const SpectralData& spectrum, const MatX& phiAtPoints, int samples,
                   double sigmaFactor, Exec exec = Exec::Parallel);

// Per-triangle feature rows [centroid(3), normal(3), WKS(w)]; centroid
// eigenvector values are the mean of the triangle's three vertex values.
MatX centroidFeatures(const Mesh& mesh, const SpectralData* spectrum, const FeatureConfig& config,
                      Exec exec = Exec::Parallel);

// Per-vertex analog [position(3), vertex normal(3), WKS(w)] used by the
// displacement baseline. Vertex normals are area-weighted face normals.
MatX vertexFeatures(const Mesh& mesh, const SpectralData* spectrum, const FeatureConfig& config,
                    Exec exec = Exec::Parallel);

}  // namespace jf
