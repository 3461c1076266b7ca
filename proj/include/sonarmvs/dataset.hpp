#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/scene.hpp"
#include "sonarmvs/simulator.hpp"

namespace sonarmvs {

enum class SceneFamily { kTerrain, kSphere, kMesh };

SceneFamily parse_scene_family(std::string_view name);
std::string to_string(SceneFamily family);

/// Sensor placement above a ground surface: random position within
/// `placement_radius` of the origin, random heading, fixed height above the
/// ground under the sensor and fixed downward pitch.
struct Placement {
  double height = 0.6;
  double pitch_deg = 25.0;
  double placement_radius = 1.0;
};

struct TerrainParams {
  std::size_t octaves = 7;
  double amplitude = 0.3;
  double extent = 8.0;
  std::size_t samples = 513;
};

struct SphereParams {
  double radius_min = 0.1;
  double radius_max = 0.25;
};

struct MeshParams {
  std::size_t blocks = 8;
  double extent = 4.0;
};

struct GenConfig {
  SceneFamily family = SceneFamily::kTerrain;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  SonarIntrinsics intrinsics = SonarIntrinsics::defaults();
  /// Source views, each a roll of the reference about the acoustic axis.
  std::vector<double> roll_deltas = {deg2rad(7.0)};
  NoiseParams noise{0.1, 0.0, 0};
  RenderOptions render;
  Placement placement;
  TerrainParams terrain;
  SphereParams sphere;
  MeshParams mesh;
  double reflectivity = 1.0;
};

struct SampleSpec {
  std::uint64_t seed = 0;
  Scene scene;
  Pose base_pose;  // reference sensor -> world
};

/// Per-sample seed derived from (config seed, index).
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

/// Scene and reference pose for sample `index`. Spheres use the identity
/// pose; terrain and mesh scenes place the sensor via `config.placement`.
SampleSpec make_sample(const GenConfig& config, std::size_t index);

/// Renders the sample's reference and source views with per-sample noise seeds.
ViewSet render_sample(const GenConfig& config, const SampleSpec& sample);

/// Height of the ground surface below (x, y), found by casting a ray downward.
double ground_height(const Scene& scene, double x, double y);

}  // namespace sonarmvs
