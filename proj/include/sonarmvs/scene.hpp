#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/raster.hpp"

namespace sonarmvs {

struct EmptyGeometry {};

struct SphereShape {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Height samples z = heights(iy, ix) at x = origin_x + ix * cell_size,
/// y = origin_y + iy * cell_size; bilinear between samples.
struct Heightfield {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  Raster<double> heights;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

using Geometry = std::variant<EmptyGeometry, SphereShape, Heightfield, TriangleMesh>;

/// Geometry in world coordinates plus a uniform backscatter coefficient.
struct Scene {
  Geometry geometry;
  double reflectivity = 1.0;
  std::uint64_t seed = 0;

  /// Throws InvalidSceneError on malformed geometry.
  void validate() const;
};

struct RayHit {
  double range = 0.0;
  // Unit surface normal. Meshes are two-sided and report the side facing the
  // ray; spheres and heightfields report the outward/upward normal.
  Vec3 normal = Vec3::UnitZ();
};

std::optional<double> ray_sphere_intersect(const Vec3& origin, const Vec3& dir,
                                           const Vec3& center, double radius);

/// First crossing of the bilinear surface, found by 2D grid traversal with an
/// exact per-cell quadratic solve.
std::optional<RayHit> ray_heightfield_intersect(const Vec3& origin, const Vec3& dir,
                                                const Heightfield& field);

struct HeightBounds {
  double min = 0.0;
  double max = 0.0;
};
HeightBounds height_bounds(const Heightfield& field);
std::optional<RayHit> ray_heightfield_intersect(const Vec3& origin, const Vec3& dir,
                                                const Heightfield& field,
                                                const HeightBounds& bounds);

std::optional<RayHit> ray_mesh_intersect(const Vec3& origin, const Vec3& dir,
                                         const TriangleMesh& mesh);

/// First hit along a unit-direction ray.
std::optional<RayHit> intersect(const Scene& scene, const Vec3& origin, const Vec3& dir);

}  // namespace sonarmvs
