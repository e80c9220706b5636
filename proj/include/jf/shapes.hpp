#pragma once

#include "jf/mesh.hpp"

#include <functional>

namespace jf {
namespace shapes {

// Procedural fixture geometry. All generators return validated meshes with
// counterclockwise winding (outward normals on closed shapes, +z on sheets).

Mesh icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());

// Surface of revolution around the z axis. profile = (r, z) samples from the
// bottom pole to the top pole; r must be 0 at both ends and positive between.
Mesh revolve(const std::vector<Vec2>& profile, int segments);

// Sphere/capsule built from revolve(); rings * segments control resolution.
Mesh uvSphere(int rings, int segments, double radius = 1.0);
Mesh capsule(int rings, int segments, double radius, double cylinderLength);

Mesh torus(int segmentsMajor, int segmentsMinor, double majorRadius, double minorRadius);

// Open sheet over [0,1]^2 with a height function (disk topology).
Mesh heightField(int nx, int ny, const std::function<double(double, double)>& height);

// Icosphere with a deterministic radial bump field.
Mesh blob(int subdivisions, double amplitude = 0.18);

// One round of Loop subdivision (with the standard boundary rules). Used to
// produce refined triangulations of the same surface for robustness tests.
Mesh loopSubdivide(const Mesh& mesh);

}  // namespace shapes
}  // namespace jf
