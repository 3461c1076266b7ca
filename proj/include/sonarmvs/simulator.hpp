#pragma once

#include <cstdint>
#include <vector>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/scene.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

struct NoiseParams {
  double speckle_scale = 0.0;   // multiplicative Gaussian, relative
  double additive_sigma = 0.0;  // additive Gaussian, intensity units
  std::uint64_t seed = 0;

  bool is_zero() const { return speckle_scale == 0.0 && additive_sigma == 0.0; }
};

struct RenderOptions {
  /// Elevation samples per azimuth column for the intensity integral.
  /// 0 selects 4 * depth_rows.
  std::size_t rays_per_elevation = 0;
  /// Rows E of the ground-truth depth map. 0 selects the elevation plane count.
  std::size_t depth_rows = 0;
  /// Lambertian cos(incidence) backscatter; optionally with 1/r^2 spreading.
  bool lambertian = true;
  bool spherical_spreading = false;
  unsigned threads = 0;
};

struct RenderResult {
  AcousticImage image;
  FrontDepthMap depth;
};

/// Renders the acoustic image seen from `sensor_pose` (sensor -> world) and the
/// matching first-return depth map. Each elevation sample deposits
/// reflectivity * max(0, -dir . n) into the two range bins around its hit range.
RenderResult raycast(const Scene& scene, const Pose& sensor_pose, const SonarIntrinsics& k,
                     const RenderOptions& options = {});

/// out = max(0, img * (1 + speckle * g1) + sigma * g2); g1, g2 are unit normal
/// fields drawn per cell from (seed, cell index).
AcousticImage add_noise(const AcousticImage& img, const NoiseParams& p);

/// Fractal value-noise heightfield (lacunarity 2, gain 0.5) centered on the
/// origin, covering extent x extent meters with `samples` points per side.
Scene make_terrain(std::uint64_t seed, std::size_t octaves, double amplitude, double extent,
                   std::size_t samples = 257);

/// Sphere fully inside the sonar scope (sensor frame = world frame), radius
/// drawn from [radius_min, radius_max]. Throws ConfigError if the scope cannot
/// contain it.
Scene make_sphere_scene(std::uint64_t seed, const SonarIntrinsics& k, double radius_min,
                        double radius_max);

/// Boxes resting on a flat floor, as a triangle mesh ("artificial" scenes).
Scene make_block_scene(std::uint64_t seed, std::size_t blocks, double extent);

struct ViewSet {
  AcousticImage reference;
  std::vector<AcousticImage> sources;
  FrontDepthMap ground_truth;
  /// Sensor -> world poses, reference first.
  std::vector<Pose> world_poses;
  /// Reference-frame -> source-frame transforms (T_ref^src), one per source.
  std::vector<Pose> relative_poses;
};

/// Renders the reference at base_pose and one source per roll offset, each at
/// base_pose * roll(delta). Source k is noised with a seed derived from
/// (noise.seed, k + 1); the reference uses view index 0.
ViewSet generate_views(const Scene& scene, const Pose& base_pose,
                       const std::vector<double>& roll_deltas, const SonarIntrinsics& k,
                       const NoiseParams& noise, const RenderOptions& options = {});

struct StereoPair {
  AcousticImage reference;
  AcousticImage source;
  FrontDepthMap ground_truth;
  Pose ref_to_src;
};

StereoPair generate_pair(const Scene& scene, const Pose& base_pose, double roll_delta,
                         const SonarIntrinsics& k, const NoiseParams& noise,
                         const RenderOptions& options = {});

/// Noise seed used for view `index` (0 = reference).
std::uint64_t view_noise_seed(std::uint64_t seed, std::size_t index);

}  // namespace sonarmvs
