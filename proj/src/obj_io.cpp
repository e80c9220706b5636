#include "jf/obj_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace jf {

namespace {

int parsePositionIndex(const std::string& token, size_t numVertices, int lineNo) {
  // OBJ corner tokens look like "7", "7/2" or "7/2/5"; only the position
  // index matters here.
  const size_t slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  long idx = 0;
  try {
    size_t pos = 0;
    idx = std::stol(head, &pos);
    if (pos != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw Error::io("OBJ line " + std::to_string(lineNo) + ": bad face index '" + token + "'");
  }
  if (idx < 0) idx += static_cast<long>(numVertices) + 1;  // relative indexing
  if (idx < 1 || idx > static_cast<long>(numVertices)) {
    throw Error::io("OBJ line " + std::to_string(lineNo) + ": face index " + head +
                    " out of range (file has " + std::to_string(numVertices) + " vertices)");
  }
  return static_cast<int>(idx - 1);
}

}  // namespace

Mesh loadObj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error::io("cannot open " + path.string());

  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) {
        throw Error::io("OBJ line " + std::to_string(lineNo) + ": malformed vertex record");
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<int> corners;
      std::string token;
      while (ss >> token) corners.push_back(parsePositionIndex(token, verts.size(), lineNo));
      if (corners.size() < 3) {
        throw Error::io("OBJ line " + std::to_string(lineNo) + ": face with fewer than 3 corners");
      }
      for (size_t k = 1; k + 1 < corners.size(); ++k) {
        tris.push_back({corners[0], corners[k], corners[k + 1]});
      }
    }
    // vt, vn, comments, groups, materials: ignored.
  }
  if (verts.empty()) throw Error::io("OBJ " + path.string() + " has no vertices");

  MatX V(verts.size(), 3);
  for (size_t j = 0; j < verts.size(); ++j) V.row(j) = verts[j];
  MatXi F(tris.size(), 3);
  for (size_t t = 0; t < tris.size(); ++t) {
    F(t, 0) = tris[t][0];
    F(t, 1) = tris[t][1];
    F(t, 2) = tris[t][2];
  }
  return Mesh::build(std::move(V), std::move(F));
}

namespace {

void writeFaces(std::FILE* f, const MatXi& triangles, bool withUv) {
  for (int t = 0; t < triangles.rows(); ++t) {
    const int a = triangles(t, 0) + 1, b = triangles(t, 1) + 1, c = triangles(t, 2) + 1;
    if (withUv) {
      std::fprintf(f, "f %d/%d %d/%d %d/%d\n", a, a, b, b, c, c);
    } else {
      std::fprintf(f, "f %d %d %d\n", a, b, c);
    }
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void saveObj(const std::filesystem::path& path, const MatX& vertices, const MatXi& triangles) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "w"));
  if (!f) throw Error::io("cannot write " + path.string());
  for (int j = 0; j < vertices.rows(); ++j) {
    std::fprintf(f.get(), "v %.17g %.17g %.17g\n", vertices(j, 0), vertices(j, 1),
                 vertices(j, 2));
  }
  writeFaces(f.get(), triangles, false);
}

void saveObjUv(const std::filesystem::path& path, const MatX& uv, const MatXi& triangles) {
  if (uv.cols() != 2) throw Error::validation("UV map must be V x 2");
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "w"));
  if (!f) throw Error::io("cannot write " + path.string());
  for (int j = 0; j < uv.rows(); ++j) {
    std::fprintf(f.get(), "v %.17g %.17g 0\n", uv(j, 0), uv(j, 1));
  }
  for (int j = 0; j < uv.rows(); ++j) {
    std::fprintf(f.get(), "vt %.17g %.17g\n", uv(j, 0), uv(j, 1));
  }
  writeFaces(f.get(), triangles, true);
}

}  // namespace jf
