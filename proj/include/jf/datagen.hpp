#pragma once

#include "jf/config.hpp"
#include "jf/dataset.hpp"
#include "jf/parallel.hpp"

namespace jf {

// Deterministic farthest-point handle selection (graph distances), starting
// from the vertex farthest from the center of mass.
std::vector<int> farthestPointHandles(const Mesh& mesh, int count);

struct GenerateReport {
  int samplesWritten = 0;
  int rejectionEvents = 0;
};

// Builds a dataset directory (manifest.json, sample files, meshes/ with OBJ
// + cache per mesh). ARAP mode: one source mesh, per-sample random handle
// configurations solved by the ARAP oracle, z = flattened handle targets.
// UV mode: per-sample disk patches from the corpus, ground truth via Tutte +
// local/global parameterization (regenerated until flip-free), z = pooled
// WKS descriptor (mean and max over centroids). Per-sample RNG streams make
// the output byte-identical for any thread count.
GenerateReport generateDataset(const RunConfig& config, Exec exec = Exec::Parallel);

}  // namespace jf
