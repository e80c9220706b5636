#pragma once

#include "jf/mlp.hpp"
#include "jf/spectral.hpp"

#include <json.hpp>

#include <filesystem>

namespace jf {

// jfckpt-1: uint64 header length, JSON header, then the parameters as one
// little-endian float32 blob in flat order (per layer W row-major then bias;
// afterwards per hidden layer the group-norm scale then offset).
struct Checkpoint {
  std::string model = "field";  // field | displacement | global_tensor
  MlpParams params;
  int zLength = 0;
  FeatureConfig features;   // how to rebuild per-point features on a mesh
  std::string mode = "3d";  // 3d | 2d
  uint64_t seed = 0;
  nlohmann::json trainConfig;  // provenance echo
};

void saveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint loadCheckpoint(const std::filesystem::path& path);

}  // namespace jf
