#pragma once

#include "jf/common.hpp"
#include "jf/spectral.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace jf {

struct MlpConfig {
  int hidden = 128;
  int layers = 5;
  int groups = 4;
};

struct ArapOracleConfig {
  int handleCount = 6;
  std::vector<int> handles;   // explicit indices win over handleCount
  double maxAngleDeg = 45.0;  // per-handle rotation bound
  double maxShiftFrac = 0.3;  // translation bound as a fraction of the bbox diagonal
  int iters = 40;
  double tol = 1e-7;  // relative energy-decrease stop
};

struct UvOracleConfig {
  double radiusMinFrac = 0.1;  // patch radius range, fraction of mesh diameter
  double radiusMaxFrac = 0.4;
  int paramIters = 80;
  double paramTol = 1e-9;
  int maxAttempts = 40;  // patch draws per sample before giving up
};

struct TrainSettings {
  int batchSize = 8;
  int epochs = 60;
  double learningRate = 1e-3;
  double droppedLearningRate = 1e-4;
  int plateauPatience = 10;
  int plateauWindow = 5;
  bool plateauEnabled = true;
  double trainFraction = 0.9;
  int trainCount = -1;  // explicit override of the 90/10 split when >= 0
  bool overfit = false;
  int overfitSteps = 2000;
};

// One config object drives every CLI command; flags override file values.
struct RunConfig {
  std::string mode = "arap";  // arap | uv
  uint64_t seed = 1;
  int threads = 0;  // 0 = all cores

  std::string meshPath;                 // arap mode source mesh
  std::vector<std::string> corpusPaths; // uv mode base shapes
  std::string outDir;

  int samples = 100;
  MlpConfig mlp;
  FeatureConfig features;
  ArapOracleConfig arap;
  UvOracleConfig uv;
  TrainSettings train;
};

nlohmann::json toJson(const RunConfig& config);
RunConfig configFromJson(const nlohmann::json& j);
RunConfig loadConfigFile(const std::string& path);

}  // namespace jf
