#include "jf/config.hpp"

#include <fstream>

namespace jf {

using nlohmann::json;

json toJson(const RunConfig& c) {
  return json{
      {"mode", c.mode},
      {"seed", c.seed},
      {"threads", c.threads},
      {"meshPath", c.meshPath},
      {"corpusPaths", c.corpusPaths},
      {"outDir", c.outDir},
      {"samples", c.samples},
      {"mlp", {{"hidden", c.mlp.hidden}, {"layers", c.mlp.layers}, {"groups", c.mlp.groups}}},
      {"features",
       {{"wksSamples", c.features.wksSamples},
        {"eigenCount", c.features.eigenCount},
        {"sigmaFactor", c.features.sigmaFactor}}},
      {"arap",
       {{"handleCount", c.arap.handleCount},
        {"handles", c.arap.handles},
        {"maxAngleDeg", c.arap.maxAngleDeg},
        {"maxShiftFrac", c.arap.maxShiftFrac},
        {"iters", c.arap.iters},
        {"tol", c.arap.tol}}},
      {"uv",
       {{"radiusMinFrac", c.uv.radiusMinFrac},
        {"radiusMaxFrac", c.uv.radiusMaxFrac},
        {"paramIters", c.uv.paramIters},
        {"paramTol", c.uv.paramTol},
        {"maxAttempts", c.uv.maxAttempts}}},
      {"train",
       {{"batchSize", c.train.batchSize},
        {"epochs", c.train.epochs},
        {"learningRate", c.train.learningRate},
        {"droppedLearningRate", c.train.droppedLearningRate},
        {"plateauPatience", c.train.plateauPatience},
        {"plateauWindow", c.train.plateauWindow},
        {"plateauEnabled", c.train.plateauEnabled},
        {"trainFraction", c.train.trainFraction},
        {"trainCount", c.train.trainCount},
        {"overfit", c.train.overfit},
        {"overfitSteps", c.train.overfitSteps}}}};
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

RunConfig configFromJson(const json& j) {
  RunConfig c;
  maybe(j, "mode", c.mode);
  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);
  maybe(j, "meshPath", c.meshPath);
  maybe(j, "corpusPaths", c.corpusPaths);
  maybe(j, "outDir", c.outDir);
  maybe(j, "samples", c.samples);
  if (j.contains("mlp")) {
    const auto& m = j.at("mlp");
    maybe(m, "hidden", c.mlp.hidden);
    maybe(m, "layers", c.mlp.layers);
    maybe(m, "groups", c.mlp.groups);
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    maybe(f, "wksSamples", c.features.wksSamples);
    maybe(f, "eigenCount", c.features.eigenCount);
    maybe(f, "sigmaFactor", c.features.sigmaFactor);
  }
  if (j.contains("arap")) {
    const auto& a = j.at("arap");
    maybe(a, "handleCount", c.arap.handleCount);
    maybe(a, "handles", c.arap.handles);
    maybe(a, "maxAngleDeg", c.arap.maxAngleDeg);
    maybe(a, "maxShiftFrac", c.arap.maxShiftFrac);
    maybe(a, "iters", c.arap.iters);
    maybe(a, "tol", c.arap.tol);
  }
  if (j.contains("uv")) {
    const auto& u = j.at("uv");
    maybe(u, "radiusMinFrac", c.uv.radiusMinFrac);
    maybe(u, "radiusMaxFrac", c.uv.radiusMaxFrac);
    maybe(u, "paramIters", c.uv.paramIters);
    maybe(u, "paramTol", c.uv.paramTol);
    maybe(u, "maxAttempts", c.uv.maxAttempts);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    maybe(t, "batchSize", c.train.batchSize);
    maybe(t, "epochs", c.train.epochs);
    maybe(t, "learningRate", c.train.learningRate);
    maybe(t, "droppedLearningRate", c.train.droppedLearningRate);
    maybe(t, "plateauPatience", c.train.plateauPatience);
    maybe(t, "plateauWindow", c.train.plateauWindow);
    maybe(t, "plateauEnabled", c.train.plateauEnabled);
    maybe(t, "trainFraction", c.train.trainFraction);
    maybe(t, "trainCount", c.train.trainCount);
    maybe(t, "overfit", c.train.overfit);
    maybe(t, "overfitSteps", c.train.overfitSteps);
  }
  if (c.mode != "arap" && c.mode != "uv") {
    throw Error::validation("mode must be 'arap' or 'uv', got '" + c.mode + "'");
  }
  return c;
}

RunConfig loadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::io("cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error::io("config " + path + " is not valid JSON");
  return configFromJson(j);
}

}  // namespace jf
