#pragma once

#include "jf/cache_io.hpp"
#include "jf/config.hpp"

#include <filesystem>

namespace jf {

// A training triplet: source mesh (by id), ground-truth map, conditioning
// code.
struct TrainingSample {
  int meshId = 0;
  MatX psi;   // V x d ground truth
  VecX code;  // z
};

// In-memory dataset. On disk: manifest.json plus sample_%06d.bin files and a
// meshes/ directory holding each mesh once as OBJ + jfcache-1 cache.
struct Dataset {
  std::string mode;  // arap | uv
  uint64_t seed = 0;
  nlohmann::json configEcho;
  std::vector<std::shared_ptr<const Mesh>> meshes;
  std::vector<OperatorCache> caches;
  std::vector<TrainingSample> samples;

  int dims() const { return mode == "uv" ? 2 : 3; }
};

void writeSampleFile(const std::filesystem::path& path, const TrainingSample& sample, int dims);
TrainingSample readSampleFile(const std::filesystem::path& path);

// Loads manifest, meshes, caches, and samples.
Dataset loadDataset(const std::filesystem::path& dir);

// Deterministic 90/10-style split (seeded shuffle). trainCount overrides the
// fraction when >= 0.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};
SplitIndices splitDataset(int sampleCount, uint64_t seed, double trainFraction, int trainCount);

}  // namespace jf
