#include "sonarmvs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/parallel.hpp"
#include "sonarmvs/random.hpp"

namespace sonarmvs {

namespace {

// Scene plus per-render acceleration data.
class Tracer {
 public:
  explicit Tracer(const Scene& scene) : scene_(scene) {
    if (const auto* hf = std::get_if<Heightfield>(&scene.geometry)) bounds_ = height_bounds(*hf);
  }

  std::optional<RayHit> trace(const Vec3& origin, const Vec3& dir) const {
    if (const auto* hf = std::get_if<Heightfield>(&scene_.geometry)) {
      return ray_heightfield_intersect(origin, dir, *hf, bounds_);
    }
    return intersect(scene_, origin, dir);
  }

 private:
  const Scene& scene_;
  HeightBounds bounds_;
};

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double lattice(std::uint64_t seed, std::uint64_t octave, long i, long j) {
  return rng::uniform(seed, octave, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(j));
}

double value_noise(std::uint64_t seed, std::uint64_t octave, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const long i = static_cast<long>(fx);
  const long j = static_cast<long>(fy);
  const double u = fade(x - fx);
  const double v = fade(y - fy);
  const double a = lattice(seed, octave, i, j);
  const double b = lattice(seed, octave, i + 1, j);
  const double c = lattice(seed, octave, i, j + 1);
  const double d = lattice(seed, octave, i + 1, j + 1);
  return (a * (1 - u) + b * u) * (1 - v) + (c * (1 - u) + d * u) * v;
}

void add_box(TriangleMesh& mesh, const Vec3& center, const Vec3& half, double yaw) {
  const Mat3 r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int n = 0; n < 8; ++n) {
    const Vec3 corner((n & 1) ? half.x() : -half.x(), (n & 2) ? half.y() : -half.y(),
                      (n & 4) ? half.z() : -half.z());
    mesh.vertices.push_back(center + r * corner);
  }
  static constexpr std::uint32_t kFaces[12][3] = {
      {0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
      {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  for (const auto& f : kFaces) mesh.faces.push_back({base + f[0], base + f[1], base + f[2]});
}

}  // namespace

RenderResult raycast(const Scene& scene, const Pose& sensor_pose, const SonarIntrinsics& k,
                     const RenderOptions& options) {
  k.validate();
  scene.validate();
  const std::size_t depth_rows = options.depth_rows ? options.depth_rows : k.elevation_planes;
  const std::size_t samples =
      options.rays_per_elevation ? options.rays_per_elevation : 4 * depth_rows;
  if (depth_rows < 2) throw ConfigError("raycast: depth map needs at least 2 rows");
  if (samples < depth_rows) throw ConfigError("raycast: rays_per_elevation must be >= E");

  RenderResult out{AcousticImage::zeros(k),
                   FrontDepthMap::filled(k, depth_rows, k.azimuth_bins, k.range_max)};
  const Tracer tracer(scene);
  const Vec3 origin = sensor_pose.translation();
  const Mat3& rot = sensor_pose.rotation();
  const Axis azimuths = k.azimuth_axis();
  const Axis rows = k.range_axis();
  const double elevation_step =
      (k.elevation_max - k.elevation_min) / static_cast<double>(samples);
  const auto max_row = static_cast<double>(k.range_bins - 1);

  // Each worker owns whole azimuth columns of both rasters.
  parallel_for(k.azimuth_bins, options.threads, [&](std::size_t col) {
    const double theta = azimuths.at(static_cast<double>(col));
    for (std::size_t m = 0; m < samples; ++m) {
      const double phi = k.elevation_min + (static_cast<double>(m) + 0.5) * elevation_step;
      const Vec3 dir = rot * spherical_to_euclidean({1.0, theta, phi});
      const auto hit = tracer.trace(origin, dir);
      if (!hit || hit->range < k.range_min || hit->range > k.range_max) continue;
      double w = scene.reflectivity;
      if (options.lambertian) w *= std::max(0.0, -dir.dot(hit->normal));
      if (options.spherical_spreading) w /= hit->range * hit->range;
      if (w <= 0.0) continue;
      const double f = std::clamp(rows.index_of(hit->range), 0.0, max_row);
      const auto i0 = static_cast<std::size_t>(std::floor(f));
      const double frac = f - static_cast<double>(i0);
      if (i0 + 1 < k.range_bins) {
        out.image.intensity(i0, col) += w * (1.0 - frac);
        out.image.intensity(i0 + 1, col) += w * frac;
      } else {
        out.image.intensity(i0, col) += w;
      }
    }
    for (std::size_t e = 0; e < depth_rows; ++e) {
      const double phi = out.depth.elevation.at(static_cast<double>(e));
      const Vec3 dir = rot * spherical_to_euclidean({1.0, theta, phi});
      const auto hit = tracer.trace(origin, dir);
      const double d = hit ? hit->range : k.range_max;
      out.depth.depth(e, col) = std::clamp(d, k.range_min, k.range_max);
    }
  });
  return out;
}

AcousticImage add_noise(const AcousticImage& img, const NoiseParams& p) {
  if (p.speckle_scale < 0.0 || p.additive_sigma < 0.0) {
    throw ConfigError("noise scales must be >= 0");
  }
  AcousticImage out = img;
  if (p.is_zero()) return out;
  auto values = out.intensity.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g1 = rng::normal(p.seed, 1, i);
    const double g2 = rng::normal(p.seed, 2, i);
    values[i] = std::max(0.0, values[i] * (1.0 + p.speckle_scale * g1) + p.additive_sigma * g2);
  }
  return out;
}

Scene make_terrain(std::uint64_t seed, std::size_t octaves, double amplitude, double extent,
                   std::size_t samples) {
  if (octaves < 1) throw ConfigError("make_terrain: octaves must be >= 1");
  if (!(extent > 0.0)) throw ConfigError("make_terrain: extent must be > 0");
  if (samples < 2) throw ConfigError("make_terrain: need at least 2 samples per side");
  Heightfield field;
  field.cell_size = extent / static_cast<double>(samples - 1);
  field.origin_x = -0.5 * extent;
  field.origin_y = -0.5 * extent;
  field.heights = Raster<double>(samples, samples, 0.0);

  constexpr double kLacunarity = 2.0;
  constexpr double kGain = 0.5;
  const double base_frequency = 4.0 / extent;  // four lattice cells across
  double norm = 0.0;
  for (std::size_t o = 0, g = 1; o < octaves; ++o, g *= 2) norm += 1.0 / static_cast<double>(g);

  for (std::size_t iy = 0; iy < samples; ++iy) {
    for (std::size_t ix = 0; ix < samples; ++ix) {
      const double x = static_cast<double>(ix) * field.cell_size;
      const double y = static_cast<double>(iy) * field.cell_size;
      double sum = 0.0;
      double freq = base_frequency;
      double gain = 1.0;
      for (std::size_t o = 0; o < octaves; ++o) {
        sum += gain * (2.0 * value_noise(seed, o, x * freq, y * freq) - 1.0);
        freq *= kLacunarity;
        gain *= kGain;
      }
      field.heights(iy, ix) = amplitude * sum / norm;
    }
  }
  Scene scene;
  scene.geometry = std::move(field);
  scene.seed = seed;
  return scene;
}

Scene make_sphere_scene(std::uint64_t seed, const SonarIntrinsics& k, double radius_min,
                        double radius_max) {
  k.validate();
  if (!(radius_min > 0.0) || radius_max < radius_min) {
    throw ConfigError("make_sphere_scene: radius range must be positive and ordered");
  }
  rng::Stream stream(seed, 0x5f3e);
  const double radius = stream.uniform(radius_min, radius_max);
  const double half_span = 0.5 * std::min(k.azimuth_max - k.azimuth_min,
                                          k.elevation_max - k.elevation_min);
  // The sphere's angular radius asin(rho / r) must leave room in both angles.
  const double r_angular = radius / std::sin(half_span);
  const double r_lo = std::max(k.range_min + radius, r_angular);
  const double r_hi = k.range_max - radius;
  if (!(r_lo < r_hi)) throw ConfigError("make_sphere_scene: scope too small for the radius");

  const double r = stream.uniform(r_lo, r_hi);
  const double margin = std::asin(std::min(1.0, radius / r));
  const double theta = stream.uniform(k.azimuth_min + margin, k.azimuth_max - margin);
  const double phi = stream.uniform(k.elevation_min + margin, k.elevation_max - margin);

  Scene scene;
  scene.geometry = SphereShape{spherical_to_euclidean({r, theta, phi}), radius};
  scene.seed = seed;
  return scene;
}

Scene make_block_scene(std::uint64_t seed, std::size_t blocks, double extent) {
  if (!(extent > 0.0)) throw ConfigError("make_block_scene: extent must be > 0");
  TriangleMesh mesh;
  const double h = 0.5 * extent;
  mesh.vertices = {{-h, -h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {-h, h, 0.0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  rng::Stream stream(seed, 0xb10c);
  for (std::size_t b = 0; b < blocks; ++b) {
    const Vec3 half(stream.uniform(0.05, 0.2), stream.uniform(0.05, 0.2),
                    stream.uniform(0.05, 0.25));
    const Vec3 center(stream.uniform(-h / 1.5, h / 1.5), stream.uniform(-h / 1.5, h / 1.5),
                      half.z());
    add_box(mesh, center, half, stream.uniform(0.0, std::numbers::pi));
  }
  Scene scene;
  scene.geometry = std::move(mesh);
  scene.seed = seed;
  return scene;
}

std::uint64_t view_noise_seed(std::uint64_t seed, std::size_t index) {
  return index == 0 ? seed : rng::hash(seed, 0x7669657773ULL, index);
}

ViewSet generate_views(const Scene& scene, const Pose& base_pose,
                       const std::vector<double>& roll_deltas, const SonarIntrinsics& k,
                       const NoiseParams& noise, const RenderOptions& options) {
  ViewSet views;
  RenderResult ref = raycast(scene, base_pose, k, options);
  NoiseParams view_noise = noise;
  view_noise.seed = view_noise_seed(noise.seed, 0);
  views.reference = add_noise(ref.image, view_noise);
  views.ground_truth = std::move(ref.depth);
  views.world_poses.push_back(base_pose);
  for (std::size_t s = 0; s < roll_deltas.size(); ++s) {
    const Pose src_pose = base_pose * Pose::roll(roll_deltas[s]);
    RenderResult src = raycast(scene, src_pose, k, options);
    view_noise.seed = view_noise_seed(noise.seed, s + 1);
    views.sources.push_back(add_noise(src.image, view_noise));
    views.world_poses.push_back(src_pose);
    views.relative_poses.push_back(src_pose.inverse() * base_pose);
  }
  return views;
}

StereoPair generate_pair(const Scene& scene, const Pose& base_pose, double roll_delta,
                         const SonarIntrinsics& k, const NoiseParams& noise,
                         const RenderOptions& options) {
  ViewSet v = generate_views(scene, base_pose, {roll_delta}, k, noise, options);
  return {std::move(v.reference), std::move(v.sources.front()), std::move(v.ground_truth),
          v.relative_poses.front()};
}

}  // namespace sonarmvs
