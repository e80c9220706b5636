#include "jf/fields.hpp"

#include "jf/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jf {

JacobianStack restrictField(const ExtrinsicField& field, const FrameSet& frames, Exec exec) {
  const int T = frames.size();
  if (static_cast<int>(field.size()) != T) {
    throw Error::validation("extrinsic field count does not match triangle count");
  }
  JacobianStack stack(2 * T, 3);
  forEachIndex(exec, T, [&](long t) {
    // R_i = P_i B_i; the stack stores R_i^T.
    stack.middleRows<2>(2 * t) = (field[t] * frames.frames[t]).transpose();
  });
  return stack;
}

ExtrinsicField restrictAdjoint(const JacobianStack& upstream, const FrameSet& frames, Exec exec) {
  const int T = frames.size();
  if (upstream.rows() != 2 * T || upstream.cols() != 3) {
    throw Error::validation("upstream stack must be 2T x 3");
  }
  ExtrinsicField out(T);
  forEachIndex(exec, T, [&](long t) {
    const Mat32 dR = upstream.middleRows<2>(2 * t).transpose();
    out[t] = dR * frames.frames[t].transpose();
  });
  return out;
}

namespace {

// Singular values of a 2x2 matrix, closed form.
void singularValues2x2(const Mat2& a, double& s1, double& s2) {
  const double e = 0.5 * (a(0, 0) + a(1, 1));
  const double f = 0.5 * (a(0, 0) - a(1, 1));
  const double g = 0.5 * (a(1, 0) + a(0, 1));
  const double h = 0.5 * (a(1, 0) - a(0, 1));
  const double q = std::sqrt(e * e + h * h);
  const double r = std::sqrt(f * f + g * g);
  s1 = q + r;
  s2 = std::abs(q - r);
}

}  // namespace

DistortionReport distortionReport(const OperatorCache& cache, const VertexMap& map, MapMode mode,
                                  Exec exec) {
  const Mesh& mesh = cache.meshRef();
  const int T = mesh.numTriangles();
  const int d = mode == MapMode::Uv2d ? 2 : 3;
  if (map.cols() != d) throw Error::validation("map dimension does not match mode");
  const JacobianStack stack = computeJacobians(cache, map);

  DistortionReport rep;
  rep.sigma1.resize(T);
  rep.sigma2.resize(T);
  rep.distortion.resize(T);
  rep.flipsDefined = (mode == MapMode::Uv2d);
  rep.flipped.assign(T, 0);

  forEachIndex(exec, T, [&](long t) {
    double s1 = 0, s2 = 0;
    if (mode == MapMode::Uv2d) {
      const Mat2 J = stack.middleRows<2>(2 * t).transpose();
      singularValues2x2(J, s1, s2);
      if (J.determinant() < 0.0) rep.flipped[t] = 1;
    } else {
      // 3x2 jacobian: singular values from the 2x2 Gram matrix.
      const Eigen::Matrix<double, 2, 3> Jt = stack.middleRows<2>(2 * t);
      const Mat2 gram = Jt * Jt.transpose();
      const double tr = gram.trace();
      const double det = gram.determinant();
      const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
      s1 = std::sqrt(std::max(0.0, tr / 2.0 + disc));
      s2 = std::sqrt(std::max(0.0, tr / 2.0 - disc));
    }
    rep.sigma1(t) = s1;
    rep.sigma2(t) = s2;
    rep.distortion(t) =
        s2 < 1e-12 ? std::numeric_limits<double>::infinity() : std::max(s1, 1.0 / s2);
  });

  std::vector<double> finite;
  finite.reserve(T);
  for (int t = 0; t < T; ++t) {
    if (rep.distortion(t) > 10.0) ++rep.countHighDistortion;
    if (rep.flipped[t]) ++rep.countFlips;
    if (std::isfinite(rep.distortion(t))) finite.push_back(rep.distortion(t));
  }
  if (!finite.empty()) {
    rep.meanDistortion = 0.0;
    for (double v : finite) rep.meanDistortion += v;
    rep.meanDistortion /= static_cast<double>(finite.size());
    std::sort(finite.begin(), finite.end());
    const size_t n = finite.size();
    rep.medianDistortion = n % 2 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  }
  return rep;
}

DistortionSummary summarizeDistortion(const std::vector<DistortionReport>& reports) {
  DistortionSummary s;
  if (reports.empty()) return s;
  std::vector<double> d10Counts;
  long meshesWithFlips = 0;
  for (const auto& r : reports) {
    d10Counts.push_back(static_cast<double>(r.countHighDistortion));
    s.avgD10 += static_cast<double>(r.countHighDistortion);
    s.avgFlips += static_cast<double>(r.countFlips);
    if (r.countFlips > 0) ++meshesWithFlips;
  }
  const double n = static_cast<double>(reports.size());
  s.avgD10 /= n;
  s.avgFlips /= n;
  s.pctMeshesWithFlips = 100.0 * static_cast<double>(meshesWithFlips) / n;
  std::sort(d10Counts.begin(), d10Counts.end());
  const size_t m = d10Counts.size();
  s.medD10 = m % 2 ? d10Counts[m / 2] : 0.5 * (d10Counts[m / 2 - 1] + d10Counts[m / 2]);
  return s;
}

}  // namespace jf
