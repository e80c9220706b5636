#pragma once

#include "jf/common.hpp"
#include "jf/parallel.hpp"

namespace jf {

// Fully-connected network: linear -> group norm -> ReLU on every hidden
// layer, plain linear output. Parameters are stored in Scalar (float in
// production, double in numeric tests); all arithmetic runs in double.
template <typename Scalar>
struct MlpParamsT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Mat> weights;  // layer l: out x in
  std::vector<Vec> biases;
  std::vector<Vec> gnScale;   // hidden layers only
  std::vector<Vec> gnOffset;
  int groups = 4;

  int numLayers() const { return static_cast<int>(weights.size()); }
  int inputWidth() const { return static_cast<int>(weights.front().cols()); }
  int outputWidth() const { return static_cast<int>(weights.back().rows()); }
  std::vector<int> layerSizes() const;

  long paramCount() const;
  double getParam(long flatIndex) const;
  void setParam(long flatIndex, double value);
  void fill(double value);

  template <typename Other>
  MlpParamsT<Other> cast() const;

  // Shapes: input -> hidden x (layers-1) -> output. Group count must divide
  // the hidden width.
  static MlpParamsT shaped(int inputWidth, int hiddenWidth, int outputWidth, int layers,
                           int groups);
  static MlpParamsT zeros(int inputWidth, int hiddenWidth, int outputWidth, int layers,
                          int groups);
  // He-style uniform fan-in weights, zero biases, unit scale / zero offset:
  // the raw output starts near zero so identity offsets dominate.
  static MlpParamsT heInit(int inputWidth, int hiddenWidth, int outputWidth, int layers,
                           int groups, Rng& rng);
};

using MlpParams = MlpParamsT<float>;

struct MlpGrads {
  MlpParamsT<double> params;
  VecX zGrad;
};

template <typename Scalar>
MlpGrads zeroGradsLike(const MlpParamsT<Scalar>& params, int zLen);
void accumulateGrads(MlpGrads& into, const MlpGrads& from);
void scaleGrads(MlpGrads& grads, double factor);

// Standalone group normalization (per sample): each group of channels is
// standardized (epsilon 1e-5) then scaled/offset per channel.
VecX groupNorm(const VecX& x, int groups, const VecX& scale, const VecX& offset);

// Single-point evaluation: raw output vector for input [z; c].
template <typename Scalar>
VecX mlpForwardRaw(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c);

// Raw outputs for all feature rows under one code z; column t corresponds to
// feature row t. Chunked so Serial and Parallel agree bitwise.
template <typename Scalar>
MatX mlpForwardBatchRaw(const MlpParamsT<Scalar>& params, const VecX& z, const MatX& features,
                        Exec exec = Exec::Parallel);

// Reverse-mode gradients summed over all feature rows, plus the gradient
// with respect to z. upstreamRaw is outputWidth x T (column t = upstream for
// row t). Accumulation is chunk-ordered and thread-count independent.
template <typename Scalar>
MlpGrads mlpBackwardBatch(const MlpParamsT<Scalar>& params, const VecX& z, const MatX& features,
                          const MatX& upstreamRaw, Exec exec = Exec::Parallel);

// The per-triangle prediction of the jacobian-field model: reshape the raw
// 9-vector row-major into 3x3 and add the identity.
template <typename Scalar>
Mat3 mlpForward(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c);

template <typename Scalar>
std::vector<Mat3> predictExtrinsic(const MlpParamsT<Scalar>& params, const VecX& z,
                                   const MatX& features, Exec exec = Exec::Parallel);

// Convenience single-point backward (recomputes the forward internally).
template <typename Scalar>
MlpGrads mlpBackward(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c,
                     const VecX& upstreamRaw);

extern template struct MlpParamsT<float>;
extern template struct MlpParamsT<double>;

}  // namespace jf
