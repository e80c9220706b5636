#include "jf/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace jf {

SpectralData computeSpectrum(const SpMat& laplacian, const VecX& vertexMass, int k) {
  const int n = static_cast<int>(laplacian.rows());
  if (k < 2) throw Error::validation("eigenpair count must be at least 2");
  if (k >= n) throw Error::validation("eigenpair count must be smaller than the vertex count");
  if (n > 3000) {
    throw Error::numeric("dense eigensolver limited to 3000 vertices, got " + std::to_string(n));
  }

  // Abar is diagonal positive, so C = Abar^{-1/2} L Abar^{-1/2} is an
  // ordinary symmetric problem with phi = Abar^{-1/2} u.
  const VecX invSqrtMass = vertexMass.array().sqrt().inverse();
  MatX C = MatX(laplacian);
  C = invSqrtMass.asDiagonal() * C * invSqrtMass.asDiagonal();
  C = 0.5 * (C + C.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatX> eig(C);
  if (eig.info() != Eigen::Success) throw Error::numeric("dense eigendecomposition failed");

  SpectralData spec;
  spec.eigenvalues = eig.eigenvalues().head(k);
  spec.eigenvectors = invSqrtMass.asDiagonal() * eig.eigenvectors().leftCols(k);

  for (int c = 0; c < k; ++c) {
    int argmax = 0;
    double best = 0.0;
    for (int r = 0; r < n; ++r) {
      const double a = std::abs(spec.eigenvectors(r, c));
      if (a > best) {
        best = a;
        argmax = r;
      }
    }
    if (spec.eigenvectors(argmax, c) < 0.0) spec.eigenvectors.col(c) *= -1.0;
  }

  // Residual check per pair: ||L phi - lambda Abar phi|| / ||Abar phi||.
  for (int c = 0; c < k; ++c) {
    const VecX phi = spec.eigenvectors.col(c);
    const VecX aphi = vertexMass.asDiagonal() * phi;
    const double res = (laplacian * phi - spec.eigenvalues(c) * aphi).norm() / aphi.norm();
    if (res > 1e-8) {
      throw Error::numeric("eigenpair " + std::to_string(c) + " residual " + std::to_string(res) +
                           " exceeds 1e-8");
    }
  }
  return spec;
}

MatX wksSignatures(const SpectralData& spectrum, const MatX& phiAtPoints, int samples,
                   double sigmaFactor, Exec exec) {
  const int k = spectrum.count();
  if (k < 3) throw Error::validation("WKS needs at least 3 eigenpairs");
  if (phiAtPoints.cols() != k) throw Error::validation("phi rows must have k columns");
  if (samples < 2) throw Error::validation("WKS needs at least 2 energy samples");
  if (!(spectrum.eigenvalues(1) > 0.0)) {
    throw Error::numeric("second eigenvalue is not positive; WKS undefined");
  }

  // Skip the near-zero first eigenvalue.
  VecX logLambda(k - 1);
  for (int m = 1; m < k; ++m) logLambda(m - 1) = std::log(spectrum.eigenvalues(m));

  const double e0 = logLambda(0);
  const double e1 = logLambda(k - 2);
  const double de = (e1 - e0) / (samples - 1);
  const double sigma = sigmaFactor * de;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  MatX out(phiAtPoints.rows(), samples);
  forEachIndex(exec, phiAtPoints.rows(), [&](long p) {
    for (int j = 0; j < samples; ++j) {
      const double e = e0 + de * j;
      double num = 0.0, den = 0.0;
      for (int m = 0; m < k - 1; ++m) {
        const double g = std::exp(-(e - logLambda(m)) * (e - logLambda(m)) * inv2s2);
        const double phi = phiAtPoints(p, m + 1);
        num += phi * phi * g;
        den += g;
      }
      out(p, j) = num / den;
    }
  });
  return out;
}

namespace {

MatX assembleFeatures(const MatX& points, const MatX& normals, const SpectralData* spectrum,
                      const MatX& phiAtPoints, const FeatureConfig& config, Exec exec) {
  const int w = config.wksSamples;
  MatX features(points.rows(), 6 + w);
  features.leftCols(3) = points;
  features.middleCols(3, 3) = normals;
  if (w > 0) {
    if (spectrum == nullptr) {
      throw Error::validation("WKS features requested but no spectrum provided");
    }
    features.rightCols(w) = wksSignatures(*spectrum, phiAtPoints, w, config.sigmaFactor, exec);
  }
  return features;
}

}  // namespace

MatX centroidFeatures(const Mesh& mesh, const SpectralData* spectrum, const FeatureConfig& config,
                      Exec exec) {
  MatX phi;
  if (config.wksSamples > 0 && spectrum != nullptr) {
    phi.resize(mesh.numTriangles(), spectrum->count());
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      phi.row(t) = (spectrum->eigenvectors.row(mesh.triangles(t, 0)) +
                    spectrum->eigenvectors.row(mesh.triangles(t, 1)) +
                    spectrum->eigenvectors.row(mesh.triangles(t, 2))) /
                   3.0;
    }
  }
  return assembleFeatures(mesh.centroids, mesh.normals, spectrum, phi, config, exec);
}

MatX vertexFeatures(const Mesh& mesh, const SpectralData* spectrum, const FeatureConfig& config,
                    Exec exec) {
  MatX normals = MatX::Zero(mesh.numVertices(), 3);
  for (int t = 0; t < mesh.numTriangles(); ++t) {
    for (int c = 0; c < 3; ++c) {
      normals.row(mesh.triangles(t, c)) += mesh.areas(t) * mesh.normals.row(t);
    }
  }
  for (int j = 0; j < mesh.numVertices(); ++j) {
    const double n = normals.row(j).norm();
    if (n > 0) normals.row(j) /= n;
  }
  MatX phi;
  if (config.wksSamples > 0 && spectrum != nullptr) phi = spectrum->eigenvectors;
  return assembleFeatures(mesh.vertices, normals, spectrum, phi, config, exec);
}

}  // namespace jf
