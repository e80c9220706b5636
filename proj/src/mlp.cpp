#include "jf/mlp.hpp"

#include <cmath>

namespace jf {

namespace {
constexpr double kGnEps = 1e-5;
}

template <typename Scalar>
std::vector<int> MlpParamsT<Scalar>::layerSizes() const {
  std::vector<int> sizes;
  sizes.push_back(inputWidth());
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

template <typename Scalar>
long MlpParamsT<Scalar>::paramCount() const {
  long n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  for (size_t l = 0; l < gnScale.size(); ++l) n += gnScale[l].size() + gnOffset[l].size();
  return n;
}

namespace {

// Flat layout: per layer W (row-major) then b; afterwards per hidden layer
// gnScale then gnOffset. Shared by checkpoints and the finite-difference
// tests.
template <typename Scalar, typename Fn>
void visitParam(MlpParamsT<Scalar>& p, long flatIndex, Fn&& fn) {
  long off = 0;
  for (size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l];
    if (flatIndex < off + w.size()) {
      const long local = flatIndex - off;
      fn(w(local / w.cols(), local % w.cols()));
      return;
    }
    off += w.size();
    auto& b = p.biases[l];
    if (flatIndex < off + b.size()) {
      fn(b(flatIndex - off));
      return;
    }
    off += b.size();
  }
  for (size_t l = 0; l < p.gnScale.size(); ++l) {
    auto& s = p.gnScale[l];
    if (flatIndex < off + s.size()) {
      fn(s(flatIndex - off));
      return;
    }
    off += s.size();
    auto& o = p.gnOffset[l];
    if (flatIndex < off + o.size()) {
      fn(o(flatIndex - off));
      return;
    }
    off += o.size();
  }
  throw Error::validation("parameter index out of range");
}

}  // namespace

template <typename Scalar>
double MlpParamsT<Scalar>::getParam(long flatIndex) const {
  double value = 0;
  visitParam(const_cast<MlpParamsT<Scalar>&>(*this), flatIndex,
             [&](auto& ref) { value = static_cast<double>(ref); });
  return value;
}

template <typename Scalar>
void MlpParamsT<Scalar>::setParam(long flatIndex, double value) {
  visitParam(*this, flatIndex, [&](auto& ref) { ref = static_cast<Scalar>(value); });
}

template <typename Scalar>
void MlpParamsT<Scalar>::fill(double value) {
  for (auto& w : weights) w.setConstant(static_cast<Scalar>(value));
  for (auto& b : biases) b.setConstant(static_cast<Scalar>(value));
  for (auto& s : gnScale) s.setConstant(static_cast<Scalar>(value));
  for (auto& o : gnOffset) o.setConstant(static_cast<Scalar>(value));
}

template <typename Scalar>
template <typename Other>
MlpParamsT<Other> MlpParamsT<Scalar>::cast() const {
  MlpParamsT<Other> out;
  out.groups = groups;
  for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
  for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
  for (const auto& s : gnScale) out.gnScale.push_back(s.template cast<Other>());
  for (const auto& o : gnOffset) out.gnOffset.push_back(o.template cast<Other>());
  return out;
}

template <typename Scalar>
MlpParamsT<Scalar> MlpParamsT<Scalar>::shaped(int inputWidth, int hiddenWidth, int outputWidth,
                                              int layers, int groups) {
  if (layers < 2) throw Error::validation("network needs at least 2 layers");
  if (hiddenWidth % groups != 0) {
    throw Error::validation("group count must divide the hidden width");
  }
  MlpParamsT<Scalar> p;
  p.groups = groups;
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? inputWidth : hiddenWidth;
    const int out = l == layers - 1 ? outputWidth : hiddenWidth;
    p.weights.emplace_back(Mat::Zero(out, in));
    p.biases.emplace_back(Vec::Zero(out));
    if (l < layers - 1) {
      p.gnScale.emplace_back(Vec::Zero(out));
      p.gnOffset.emplace_back(Vec::Zero(out));
    }
  }
  return p;
}

template <typename Scalar>
MlpParamsT<Scalar> MlpParamsT<Scalar>::zeros(int inputWidth, int hiddenWidth, int outputWidth,
                                             int layers, int groups) {
  return shaped(inputWidth, hiddenWidth, outputWidth, layers, groups);
}

template <typename Scalar>
MlpParamsT<Scalar> MlpParamsT<Scalar>::heInit(int inputWidth, int hiddenWidth, int outputWidth,
                                              int layers, int groups, Rng& rng) {
  MlpParamsT<Scalar> p = shaped(inputWidth, hiddenWidth, outputWidth, layers, groups);
  for (auto& w : p.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (long r = 0; r < w.rows(); ++r) {
      for (long c = 0; c < w.cols(); ++c) {
        w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
      }
    }
  }
  for (auto& s : p.gnScale) s.setOnes();
  return p;
}

VecX groupNorm(const VecX& x, int groups, const VecX& scale, const VecX& offset) {
  const int n = static_cast<int>(x.size());
  if (n % groups != 0) throw Error::validation("group count must divide channel count");
  if (scale.size() != n || offset.size() != n) {
    throw Error::validation("scale/offset size must match channel count");
  }
  const int m = n / groups;
  VecX y(n);
  for (int g = 0; g < groups; ++g) {
    const auto seg = x.segment(g * m, m);
    const double mu = seg.mean();
    const double var = (seg.array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kGnEps);
    y.segment(g * m, m) = (seg.array() - mu) * inv;
  }
  return (y.array() * scale.array() + offset.array()).matrix();
}

namespace {

struct ChunkWork {
  // Forward intermediates per hidden layer, one column per sample.
  std::vector<MatX> xhat;    // normalized pre-affine activations
  std::vector<MatX> hidden;  // post-ReLU
  std::vector<MatX> invStd;  // groups x n
  MatX input;
  MatX output;
};

// Forward for one chunk of columns. dp = double-cast parameters.
void forwardChunk(const MlpParamsT<double>& dp, const VecX& z, const MatX& features, long begin,
                  long end, ChunkWork& work, bool keepIntermediates) {
  const long n = end - begin;
  const int zLen = static_cast<int>(z.size());
  const int featLen = static_cast<int>(features.cols());
  const int layers = dp.numLayers();
  const int groups = dp.groups;

  work.input.resize(zLen + featLen, n);
  for (long j = 0; j < n; ++j) {
    work.input.col(j).head(zLen) = z;
    if (featLen > 0) work.input.col(j).tail(featLen) = features.row(begin + j).transpose();
  }
  if (keepIntermediates) {
    work.xhat.resize(layers - 1);
    work.hidden.resize(layers - 1);
    work.invStd.resize(layers - 1);
  }

  MatX h = work.input;
  for (int l = 0; l < layers - 1; ++l) {
    MatX a = (dp.weights[l] * h).colwise() + dp.biases[l];
    const int width = static_cast<int>(a.rows());
    const int m = width / groups;
    MatX xhat(width, n);
    MatX invStd(groups, n);
    for (long j = 0; j < n; ++j) {
      for (int g = 0; g < groups; ++g) {
        auto seg = a.col(j).segment(g * m, m);
        const double mu = seg.mean();
        const double var = (seg.array() - mu).square().mean();
        const double inv = 1.0 / std::sqrt(var + kGnEps);
        xhat.col(j).segment(g * m, m) = (seg.array() - mu) * inv;
        invStd(g, j) = inv;
      }
    }
    MatX y = (xhat.array().colwise() * dp.gnScale[l].array()).colwise() + dp.gnOffset[l].array();
    h = y.array().max(0.0);
    if (keepIntermediates) {
      work.xhat[l] = std::move(xhat);
      work.invStd[l] = std::move(invStd);
      work.hidden[l] = h;
    }
  }
  work.output = (dp.weights[layers - 1] * h).colwise() + dp.biases[layers - 1];
}

// Backward for one chunk; accumulates into grads (which the caller zeroed).
void backwardChunk(const MlpParamsT<double>& dp, const MatX& upstream, long begin, long end,
                   ChunkWork& work, MlpGrads& grads) {
  const long n = end - begin;
  const int layers = dp.numLayers();
  const int groups = dp.groups;
  const int zLen = static_cast<int>(grads.zGrad.size());

  MatX dOut = upstream.middleCols(begin, n);

  // Output layer.
  const MatX& hLast = layers >= 2 ? work.hidden[layers - 2] : work.input;
  grads.params.weights[layers - 1] += dOut * hLast.transpose();
  grads.params.biases[layers - 1] += dOut.rowwise().sum();
  MatX dh = dp.weights[layers - 1].transpose() * dOut;

  for (int l = layers - 2; l >= 0; --l) {
    const MatX& h = work.hidden[l];
    const MatX& xhat = work.xhat[l];
    const MatX& invStd = work.invStd[l];
    const int width = static_cast<int>(h.rows());
    const int m = width / groups;

    // ReLU then the affine part of group norm.
    MatX dy = (h.array() > 0.0).select(dh, MatX::Zero(width, n));
    grads.params.gnScale[l] += (dy.array() * xhat.array()).rowwise().sum().matrix();
    grads.params.gnOffset[l] += dy.rowwise().sum();
    MatX dxhat = dy.array().colwise() * dp.gnScale[l].array();

    // Standardization backward per group.
    MatX da(width, n);
    for (long j = 0; j < n; ++j) {
      for (int g = 0; g < groups; ++g) {
        auto dxh = dxhat.col(j).segment(g * m, m);
        auto xh = xhat.col(j).segment(g * m, m);
        const double meanDxh = dxh.mean();
        const double meanDxhXh = (dxh.array() * xh.array()).mean();
        da.col(j).segment(g * m, m) =
            invStd(g, j) * (dxh.array() - meanDxh - xh.array() * meanDxhXh);
      }
    }

    const MatX& prev = l == 0 ? work.input : work.hidden[l - 1];
    grads.params.weights[l] += da * prev.transpose();
    grads.params.biases[l] += da.rowwise().sum();
    dh = dp.weights[l].transpose() * da;
  }

  if (zLen > 0) grads.zGrad += dh.topRows(zLen).rowwise().sum();
}

}  // namespace

template <typename Scalar>
MlpGrads zeroGradsLike(const MlpParamsT<Scalar>& params, int zLen) {
  MlpGrads g;
  g.params = params.template cast<double>();
  g.params.fill(0.0);
  g.zGrad = VecX::Zero(zLen);
  return g;
}

void accumulateGrads(MlpGrads& into, const MlpGrads& from) {
  for (size_t l = 0; l < into.params.weights.size(); ++l) {
    into.params.weights[l] += from.params.weights[l];
    into.params.biases[l] += from.params.biases[l];
  }
  for (size_t l = 0; l < into.params.gnScale.size(); ++l) {
    into.params.gnScale[l] += from.params.gnScale[l];
    into.params.gnOffset[l] += from.params.gnOffset[l];
  }
  into.zGrad += from.zGrad;
}

void scaleGrads(MlpGrads& grads, double factor) {
  for (auto& w : grads.params.weights) w *= factor;
  for (auto& b : grads.params.biases) b *= factor;
  for (auto& s : grads.params.gnScale) s *= factor;
  for (auto& o : grads.params.gnOffset) o *= factor;
  grads.zGrad *= factor;
}

namespace {
inline MlpGrads zeroGrads(const MlpParamsT<double>& dp, int zLen) {
  return zeroGradsLike(dp, zLen);
}
inline void addGrads(MlpGrads& into, const MlpGrads& from) { accumulateGrads(into, from); }
}  // namespace

template <typename Scalar>
MatX mlpForwardBatchRaw(const MlpParamsT<Scalar>& params, const VecX& z, const MatX& features,
                        Exec exec) {
  const long T = features.rows() > 0 ? features.rows() : 1;
  const int expected = static_cast<int>(z.size() + features.cols());
  if (params.inputWidth() != expected) {
    throw Error::validation("input width mismatch: network expects " +
                            std::to_string(params.inputWidth()) + ", got " +
                            std::to_string(expected));
  }
  const MlpParamsT<double> dp = params.template cast<double>();
  MatX out(params.outputWidth(), T);
  forEachChunk(exec, T, kDefaultChunk, [&](long, long begin, long end) {
    ChunkWork work;
    forwardChunk(dp, z, features, begin, end, work, false);
    out.middleCols(begin, end - begin) = work.output;
  });
  return out;
}

template <typename Scalar>
MlpGrads mlpBackwardBatch(const MlpParamsT<Scalar>& params, const VecX& z, const MatX& features,
                          const MatX& upstreamRaw, Exec exec) {
  const long T = features.rows() > 0 ? features.rows() : 1;
  if (upstreamRaw.cols() != T || upstreamRaw.rows() != params.outputWidth()) {
    throw Error::validation("upstream must be outputWidth x T");
  }
  const MlpParamsT<double> dp = params.template cast<double>();
  const int zLen = static_cast<int>(z.size());

  const long numChunks = (T + kDefaultChunk - 1) / kDefaultChunk;
  std::vector<MlpGrads> partial(numChunks);
  forEachChunk(exec, T, kDefaultChunk, [&](long c, long begin, long end) {
    partial[c] = zeroGrads(dp, zLen);
    ChunkWork work;
    forwardChunk(dp, z, features, begin, end, work, true);
    backwardChunk(dp, upstreamRaw, begin, end, work, partial[c]);
  });

  // Fixed combine order: results do not depend on the thread count.
  MlpGrads total = zeroGrads(dp, zLen);
  for (long c = 0; c < numChunks; ++c) addGrads(total, partial[c]);
  return total;
}

template <typename Scalar>
VecX mlpForwardRaw(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c) {
  MatX features(1, c.size());
  features.row(0) = c.transpose();
  return mlpForwardBatchRaw(params, z, features, Exec::Serial).col(0);
}

template <typename Scalar>
Mat3 mlpForward(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c) {
  if (params.outputWidth() != 9) throw Error::validation("matrix prediction needs 9 outputs");
  const VecX raw = mlpForwardRaw(params, z, c);
  Mat3 p;
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) p(r, col) = raw(3 * r + col);
  }
  return p + Mat3::Identity();
}

template <typename Scalar>
std::vector<Mat3> predictExtrinsic(const MlpParamsT<Scalar>& params, const VecX& z,
                                   const MatX& features, Exec exec) {
  if (params.outputWidth() != 9) throw Error::validation("matrix prediction needs 9 outputs");
  const MatX raw = mlpForwardBatchRaw(params, z, features, exec);
  std::vector<Mat3> out(raw.cols());
  for (long t = 0; t < raw.cols(); ++t) {
    Mat3 p;
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) p(r, col) = raw(3 * r + col, t);
    }
    out[t] = p + Mat3::Identity();
  }
  return out;
}

template <typename Scalar>
MlpGrads mlpBackward(const MlpParamsT<Scalar>& params, const VecX& z, const VecX& c,
                     const VecX& upstreamRaw) {
  MatX features(1, c.size());
  features.row(0) = c.transpose();
  MatX upstream(upstreamRaw.size(), 1);
  upstream.col(0) = upstreamRaw;
  return mlpBackwardBatch(params, z, features, upstream, Exec::Serial);
}

template struct MlpParamsT<float>;
template struct MlpParamsT<double>;
template MlpParamsT<double> MlpParamsT<float>::cast<double>() const;
template MlpParamsT<float> MlpParamsT<float>::cast<float>() const;
template MlpParamsT<double> MlpParamsT<double>::cast<double>() const;
template MlpParamsT<float> MlpParamsT<double>::cast<float>() const;

template MatX mlpForwardBatchRaw<float>(const MlpParamsT<float>&, const VecX&, const MatX&, Exec);
template MatX mlpForwardBatchRaw<double>(const MlpParamsT<double>&, const VecX&, const MatX&,
                                         Exec);
template MlpGrads mlpBackwardBatch<float>(const MlpParamsT<float>&, const VecX&, const MatX&,
                                          const MatX&, Exec);
template MlpGrads mlpBackwardBatch<double>(const MlpParamsT<double>&, const VecX&, const MatX&,
                                           const MatX&, Exec);
template VecX mlpForwardRaw<float>(const MlpParamsT<float>&, const VecX&, const VecX&);
template VecX mlpForwardRaw<double>(const MlpParamsT<double>&, const VecX&, const VecX&);
template Mat3 mlpForward<float>(const MlpParamsT<float>&, const VecX&, const VecX&);
template Mat3 mlpForward<double>(const MlpParamsT<double>&, const VecX&, const VecX&);
template std::vector<Mat3> predictExtrinsic<float>(const MlpParamsT<float>&, const VecX&,
                                                   const MatX&, Exec);
template std::vector<Mat3> predictExtrinsic<double>(const MlpParamsT<double>&, const VecX&,
                                                    const MatX&, Exec);
template MlpGrads mlpBackward<float>(const MlpParamsT<float>&, const VecX&, const VecX&,
                                     const VecX&);
template MlpGrads mlpBackward<double>(const MlpParamsT<double>&, const VecX&, const VecX&,
                                      const VecX&);
template MlpGrads zeroGradsLike<float>(const MlpParamsT<float>&, int);
template MlpGrads zeroGradsLike<double>(const MlpParamsT<double>&, int);

}  // namespace jf
