#pragma once

#include "jf/mlp.hpp"

namespace jf {

// Adam with bias correction. Moments are kept in double; parameter storage
// keeps its own precision.
struct AdamState {
  MlpParamsT<double> m;
  MlpParamsT<double> v;
  long step = 0;
  double learningRate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  template <typename Scalar>
  static AdamState init(const MlpParamsT<Scalar>& params, double learningRate) {
    AdamState s;
    s.m = params.template cast<double>();
    s.m.fill(0.0);
    s.v = s.m;
    s.learningRate = learningRate;
    return s;
  }
};

template <typename Scalar>
void adamStep(MlpParamsT<Scalar>& params, const MlpParamsT<double>& grads, AdamState& state);

}  // namespace jf
