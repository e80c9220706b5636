#include "jf/adam.hpp"

#include <cmath>

namespace jf {

namespace {

template <typename ParamBlock, typename GradBlock, typename MomentBlock>
void updateBlock(ParamBlock& p, const GradBlock& g, MomentBlock& m, MomentBlock& v,
                 const AdamState& s, double corr1, double corr2) {
  for (long i = 0; i < p.size(); ++i) {
    const double grad = g(i);
    m(i) = s.beta1 * m(i) + (1.0 - s.beta1) * grad;
    v(i) = s.beta2 * v(i) + (1.0 - s.beta2) * grad * grad;
    const double mhat = m(i) / corr1;
    const double vhat = v(i) / corr2;
    p(i) = static_cast<typename ParamBlock::Scalar>(
        static_cast<double>(p(i)) - s.learningRate * mhat / (std::sqrt(vhat) + s.epsilon));
  }
}

}  // namespace

template <typename Scalar>
void adamStep(MlpParamsT<Scalar>& params, const MlpParamsT<double>& grads, AdamState& state) {
  ++state.step;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t l = 0; l < params.weights.size(); ++l) {
    updateBlock(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l],
                state, corr1, corr2);
    updateBlock(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l], state,
                corr1, corr2);
  }
  for (size_t l = 0; l < params.gnScale.size(); ++l) {
    updateBlock(params.gnScale[l], grads.gnScale[l], state.m.gnScale[l], state.v.gnScale[l],
                state, corr1, corr2);
    updateBlock(params.gnOffset[l], grads.gnOffset[l], state.m.gnOffset[l], state.v.gnOffset[l],
                state, corr1, corr2);
  }
}

template void adamStep<float>(MlpParamsT<float>&, const MlpParamsT<double>&, AdamState&);
template void adamStep<double>(MlpParamsT<double>&, const MlpParamsT<double>&, AdamState&);

}  // namespace jf
