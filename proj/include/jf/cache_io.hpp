#pragma once

#include "jf/operators.hpp"
#include "jf/spectral.hpp"

#include <filesystem>

namespace jf {

// jfcache-1: one binary file per mesh. Layout: a little-endian uint64 header
// length, a JSON header (format version, counts, pin vertex, section table,
// hashes), then the payload as little-endian float64 sections in table
// order: frames, gradient CSR (row pointers, column indices, values), mass
// diagonal, Laplacian CSR, and optionally the spectrum. Integer index arrays
// are stored as exact float64. The factorization is recomputed on load.

struct CacheInfo {
  int vertexCount = 0;
  int triangleCount = 0;
  int pinVertex = 0;
  int spectrumCount = 0;
  std::string sourceHash;  // FNV-1a of the source OBJ bytes
};

void saveCache(const std::filesystem::path& path, const OperatorCache& cache,
               const std::string& sourceHash);

// Header only; used for the preprocess up-to-date check.
CacheInfo peekCache(const std::filesystem::path& path);

// Verifies the payload checksum and the mesh's shape, rebuilds the
// operators, and refactorizes.
OperatorCache loadCache(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh);

// Hash of a file's bytes, as stored in sourceHash.
std::string hashFile(const std::filesystem::path& path);

}  // namespace jf
