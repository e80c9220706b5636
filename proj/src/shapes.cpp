#include "jf/shapes.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace jf {
namespace shapes {

namespace {
constexpr double kPi = std::numbers::pi;
}

Mesh icosphere(int subdivisions, double radius, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (auto& v : verts) v.normalize();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  MatX V(verts.size(), 3);
  for (size_t j = 0; j < verts.size(); ++j) V.row(j) = center.transpose() + radius * verts[j].transpose();
  MatXi F(faces.size(), 3);
  for (size_t t = 0; t < faces.size(); ++t) F.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return Mesh::build(std::move(V), std::move(F));
}

Mesh revolve(const std::vector<Vec2>& profile, int segments) {
  const int m = static_cast<int>(profile.size());
  if (m < 3) throw Error::validation("revolve needs at least 3 profile points");
  if (std::abs(profile.front().x()) > 1e-9 || std::abs(profile.back().x()) > 1e-9) {
    throw Error::validation("revolve profile must start and end on the axis (r = 0)");
  }

  std::vector<Vec3> verts;
  verts.emplace_back(0, 0, profile.front().y());  // bottom pole
  const int rings = m - 2;
  for (int i = 1; i <= rings; ++i) {
    const double r = profile[i].x();
    const double z = profile[i].y();
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * kPi * s / segments;
      verts.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  }
  verts.emplace_back(0, 0, profile.back().y());  // top pole
  const int top = static_cast<int>(verts.size()) - 1;
  auto ring = [&](int i, int s) { return 1 + (i - 1) * segments + (s % segments); };

  std::vector<std::array<int, 3>> faces;
  for (int s = 0; s < segments; ++s) {  // bottom fan
    faces.push_back({0, ring(1, s + 1), ring(1, s)});
  }
  for (int i = 1; i < rings; ++i) {
    for (int s = 0; s < segments; ++s) {
      const int a = ring(i, s), b = ring(i, s + 1), c = ring(i + 1, s), d = ring(i + 1, s + 1);
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  for (int s = 0; s < segments; ++s) {  // top fan
    faces.push_back({top, ring(rings, s), ring(rings, s + 1)});
  }

  MatX V(verts.size(), 3);
  for (size_t j = 0; j < verts.size(); ++j) V.row(j) = verts[j];
  MatXi F(faces.size(), 3);
  for (size_t t = 0; t < faces.size(); ++t) F.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return Mesh::build(std::move(V), std::move(F));
}

Mesh uvSphere(int rings, int segments, double radius) {
  std::vector<Vec2> profile;
  for (int i = 0; i <= rings + 1; ++i) {
    const double theta = kPi * i / (rings + 1);
    profile.emplace_back(radius * std::sin(theta), -radius * std::cos(theta));
  }
  return revolve(profile, segments);
}

Mesh capsule(int rings, int segments, double radius, double cylinderLength) {
  // rings = latitude subdivisions per hemisphere; the straight section gets a
  // comparable axial sample density.
  const double h = cylinderLength / 2.0;
  std::vector<Vec2> profile;
  for (int i = 0; i <= rings; ++i) {
    const double theta = 0.5 * kPi * i / rings;  // 0 at pole
    profile.emplace_back(radius * std::sin(theta), -h - radius * std::cos(theta));
  }
  const int axial = std::max(1, static_cast<int>(std::round(cylinderLength / (radius * 0.5 * kPi / rings))));
  for (int i = 1; i < axial; ++i) {
    profile.emplace_back(radius, -h + cylinderLength * i / axial);
  }
  for (int i = 0; i <= rings; ++i) {
    const double theta = 0.5 * kPi * (1.0 - static_cast<double>(i) / rings);
    profile.emplace_back(radius * std::sin(theta), h + radius * std::cos(theta));
  }
  return revolve(profile, segments);
}

Mesh torus(int segmentsMajor, int segmentsMinor, double majorRadius, double minorRadius) {
  MatX V(segmentsMajor * segmentsMinor, 3);
  for (int i = 0; i < segmentsMajor; ++i) {
    const double u = 2.0 * kPi * i / segmentsMajor;
    for (int j = 0; j < segmentsMinor; ++j) {
      const double v = 2.0 * kPi * j / segmentsMinor;
      const double r = majorRadius + minorRadius * std::cos(v);
      V.row(i * segmentsMinor + j) << r * std::cos(u), r * std::sin(u), minorRadius * std::sin(v);
    }
  }
  std::vector<std::array<int, 3>> faces;
  auto at = [&](int i, int j) { return (i % segmentsMajor) * segmentsMinor + (j % segmentsMinor); };
  for (int i = 0; i < segmentsMajor; ++i) {
    for (int j = 0; j < segmentsMinor; ++j) {
      const int a = at(i, j), b = at(i + 1, j), c = at(i, j + 1), d = at(i + 1, j + 1);
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  MatXi F(faces.size(), 3);
  for (size_t t = 0; t < faces.size(); ++t) F.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return Mesh::build(std::move(V), std::move(F));
}

Mesh heightField(int nx, int ny, const std::function<double(double, double)>& height) {
  MatX V(nx * ny, 3);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = static_cast<double>(i) / (nx - 1);
      const double y = static_cast<double>(j) / (ny - 1);
      V.row(i * ny + j) << x, y, height(x, y);
    }
  }
  std::vector<std::array<int, 3>> faces;
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      const int a = i * ny + j, b = (i + 1) * ny + j, c = i * ny + j + 1, d = (i + 1) * ny + j + 1;
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  MatXi F(faces.size(), 3);
  for (size_t t = 0; t < faces.size(); ++t) F.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return Mesh::build(std::move(V), std::move(F));
}

Mesh blob(int subdivisions, double amplitude) {
  Mesh base = icosphere(subdivisions);
  MatX V = base.vertices;
  for (int j = 0; j < V.rows(); ++j) {
    const Vec3 p = V.row(j);
    const double bump = 1.0 + amplitude * (std::sin(3.0 * p.x()) * std::sin(2.0 * p.y() + 1.0) +
                                           0.5 * std::cos(4.0 * p.z()));
    V.row(j) = p * bump;
  }
  return Mesh::build(std::move(V), base.triangles);
}

Mesh loopSubdivide(const Mesh& mesh) {
  const int V = mesh.numVertices();
  const int T = mesh.numTriangles();

  std::map<std::pair<int, int>, int> edgeVertex;
  std::map<std::pair<int, int>, std::vector<int>> edgeOpposite;
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.triangles(t, c);
      const int b = mesh.triangles(t, (c + 1) % 3);
      const int o = mesh.triangles(t, (c + 2) % 3);
      edgeOpposite[std::minmax(a, b)].push_back(o);
    }
  }

  std::vector<Vec3> verts(V + edgeOpposite.size());

  // Even (original) vertices.
  std::vector<std::vector<int>> neighbors(V);
  std::vector<char> onBoundary(V, 0);
  std::vector<std::vector<int>> boundaryNbr(V);
  for (const auto& [edge, opp] : edgeOpposite) {
    neighbors[edge.first].push_back(edge.second);
    neighbors[edge.second].push_back(edge.first);
    if (opp.size() == 1) {
      onBoundary[edge.first] = onBoundary[edge.second] = 1;
      boundaryNbr[edge.first].push_back(edge.second);
      boundaryNbr[edge.second].push_back(edge.first);
    }
  }
  for (int j = 0; j < V; ++j) {
    const Vec3 p = mesh.vertices.row(j);
    if (onBoundary[j]) {
      Vec3 s = Vec3::Zero();
      for (int nb : boundaryNbr[j]) s += mesh.vertices.row(nb);
      verts[j] = 0.75 * p + 0.125 * s;
    } else {
      const int n = static_cast<int>(neighbors[j].size());
      const double beta =
          (n == 3) ? 3.0 / 16.0
                   : 3.0 / (8.0 * n);
      Vec3 s = Vec3::Zero();
      for (int nb : neighbors[j]) s += mesh.vertices.row(nb);
      verts[j] = (1.0 - n * beta) * p + beta * s;
    }
  }

  // Odd (edge) vertices.
  int nextIdx = V;
  for (const auto& [edge, opp] : edgeOpposite) {
    const Vec3 a = mesh.vertices.row(edge.first);
    const Vec3 b = mesh.vertices.row(edge.second);
    Vec3 p;
    if (opp.size() == 2) {
      const Vec3 c = mesh.vertices.row(opp[0]);
      const Vec3 d = mesh.vertices.row(opp[1]);
      p = 0.375 * (a + b) + 0.125 * (c + d);
    } else {
      p = 0.5 * (a + b);
    }
    verts[nextIdx] = p;
    edgeVertex[edge] = nextIdx++;
  }

  std::vector<std::array<int, 3>> faces;
  faces.reserve(4 * T);
  for (int t = 0; t < T; ++t) {
    const int a = mesh.triangles(t, 0), b = mesh.triangles(t, 1), c = mesh.triangles(t, 2);
    const int ab = edgeVertex[std::minmax(a, b)];
    const int bc = edgeVertex[std::minmax(b, c)];
    const int ca = edgeVertex[std::minmax(c, a)];
    faces.push_back({a, ab, ca});
    faces.push_back({b, bc, ab});
    faces.push_back({c, ca, bc});
    faces.push_back({ab, bc, ca});
  }

  MatX Vm(verts.size(), 3);
  for (size_t j = 0; j < verts.size(); ++j) Vm.row(j) = verts[j];
  MatXi F(faces.size(), 3);
  for (size_t t = 0; t < faces.size(); ++t) F.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return Mesh::build(std::move(Vm), std::move(F));
}

}  // namespace shapes
}  // namespace jf
