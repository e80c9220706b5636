#pragma once

#include "jf/mesh.hpp"

#include <filesystem>

namespace jf {

// Reads `v` and `f` records; faces with more than three corners are
// fan-triangulated; texture/normal indices after '/' are ignored.
Mesh loadObj(const std::filesystem::path& path);

// Writes `v x y z` with 17 significant digits (exact double round trip) and
// 1-based `f i j k`.
void saveObj(const std::filesystem::path& path, const MatX& vertices, const MatXi& triangles);

// 2D maps are written with z = 0 plus matching `vt` records.
void saveObjUv(const std::filesystem::path& path, const MatX& uv, const MatXi& triangles);

}  // namespace jf
