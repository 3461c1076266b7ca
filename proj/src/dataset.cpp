#include "sonarmvs/dataset.hpp"

#include <cmath>
#include <numbers>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/random.hpp"

namespace sonarmvs {

SceneFamily parse_scene_family(std::string_view name) {
  if (name == "terrain") return SceneFamily::kTerrain;
  if (name == "sphere") return SceneFamily::kSphere;
  if (name == "mesh") return SceneFamily::kMesh;
  throw ConfigError("unknown scene family '" + std::string(name) +
                    "' (expected terrain, sphere or mesh)");
}

std::string to_string(SceneFamily family) {
  switch (family) {
    case SceneFamily::kTerrain:
      return "terrain";
    case SceneFamily::kSphere:
      return "sphere";
    case SceneFamily::kMesh:
      return "mesh";
  }
  return "terrain";
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  return rng::hash(seed, 0x73616d706c65ULL, index);
}

double ground_height(const Scene& scene, double x, double y) {
  constexpr double kAbove = 1.0e3;
  const auto hit = intersect(scene, Vec3(x, y, kAbove), -Vec3::UnitZ());
  if (!hit) throw DataError("no ground below the sensor placement");
  return kAbove - hit->range;
}

namespace {

Pose place_sensor(const Scene& scene, const Placement& p, std::uint64_t seed) {
  rng::Stream stream(seed, 0x706f7365);
  const double radius = p.placement_radius * std::sqrt(stream.uniform01());
  const double angle = stream.uniform(0.0, 2.0 * std::numbers::pi);
  const double heading = stream.uniform(-std::numbers::pi, std::numbers::pi);
  const double x = radius * std::cos(angle);
  const double y = radius * std::sin(angle);
  const double z = ground_height(scene, x, y) + p.height;
  return Pose::translation(Vec3(x, y, z)) * Pose::yaw(heading) * Pose::pitch(deg2rad(p.pitch_deg));
}

}  // namespace

SampleSpec make_sample(const GenConfig& config, std::size_t index) {
  SampleSpec s;
  s.seed = sample_seed(config.seed, index);
  switch (config.family) {
    case SceneFamily::kTerrain:
      s.scene = make_terrain(s.seed, config.terrain.octaves, config.terrain.amplitude,
                             config.terrain.extent, config.terrain.samples);
      s.base_pose = place_sensor(s.scene, config.placement, s.seed);
      break;
    case SceneFamily::kSphere:
      s.scene = make_sphere_scene(s.seed, config.intrinsics, config.sphere.radius_min,
                                  config.sphere.radius_max);
      s.base_pose = Pose::identity();
      break;
    case SceneFamily::kMesh:
      s.scene = make_block_scene(s.seed, config.mesh.blocks, config.mesh.extent);
      s.base_pose = place_sensor(s.scene, config.placement, s.seed);
      break;
  }
  s.scene.reflectivity = config.reflectivity;
  return s;
}

ViewSet render_sample(const GenConfig& config, const SampleSpec& sample) {
  NoiseParams noise = config.noise;
  noise.seed = rng::hash(sample.seed, 0x6e6f697365ULL);
  return generate_views(sample.scene, sample.base_pose, config.roll_deltas, config.intrinsics,
                        noise, config.render);
}

}  // namespace sonarmvs
