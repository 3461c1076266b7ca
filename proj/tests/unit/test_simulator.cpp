#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "sonarmvs/errors.hpp"
#include "sonarmvs/scene.hpp"
#include "sonarmvs/simulator.hpp"

using namespace sonarmvs;
using testing::near;

namespace {

double image_sum(const AcousticImage& img) {
  const auto v = img.intensity.values();
  return std::accumulate(v.begin(), v.end(), 0.0);
}

Scene sphere_scene(const Vec3& center, double radius) {
  Scene s;
  s.geometry = SphereShape{center, radius};
  return s;
}

double height_std(const Scene& s) {
  const auto& h = std::get<Heightfield>(s.geometry).heights.values();
  const double mean = std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
  double var = 0.0;
  for (double v : h) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(h.size()));
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("ray_sphere_intersect") {
  const Vec3 o = Vec3::Zero();
  const Vec3 c(2, 0, 0);
  auto hit = ray_sphere_intersect(o, {1, 0, 0}, c, 0.5);
  REQUIRE(hit);
  CHECK(near(*hit, 1.5, 1e-15));
  CHECK_FALSE(ray_sphere_intersect(o, {0, 1, 0}, c, 0.5));

  // Impact parameter equal to the radius: the tangent point.
  const double b = 0.5;
  const Vec3 dir = Vec3(std::sqrt(4.0 - b * b), b, 0).normalized();
  hit = ray_sphere_intersect(o, dir, c, 0.5);
  REQUIRE(hit);
  CHECK(near(*hit, std::sqrt(4.0 - 0.25), 1e-6));
}

TEST_CASE("ray_heightfield_intersect") {
  Heightfield flat;
  flat.origin_x = -2;
  flat.origin_y = -2;
  flat.cell_size = 0.5;
  flat.heights = Raster<double>(9, 9, 0.0);
  auto hit = ray_heightfield_intersect({0, 0, 1}, {0, 0, -1}, flat);
  REQUIRE(hit);
  CHECK(near(hit->range, 1.0, 1e-12));
  CHECK(near(hit->normal.z(), 1.0, 1e-12));
  CHECK_FALSE(ray_heightfield_intersect({0, 0, 1}, {1, 0, 0}, flat));

  // z = a x + b y + c is reproduced exactly by bilinear interpolation.
  const double a = 0.2;
  const double bb = -0.15;
  const double c0 = 0.05;
  Heightfield slope = flat;
  slope.heights = Raster<double>(33, 33);
  slope.cell_size = 0.125;
  for (std::size_t iy = 0; iy < 33; ++iy) {
    for (std::size_t ix = 0; ix < 33; ++ix) {
      const double x = slope.origin_x + static_cast<double>(ix) * slope.cell_size;
      const double y = slope.origin_y + static_cast<double>(iy) * slope.cell_size;
      slope.heights(iy, ix) = a * x + bb * y + c0;
    }
  }
  const Vec3 origins[] = {{-1.2, 0.3, 1.0}, {0.4, -1.1, 0.7}, {1.5, 1.5, 2.0}};
  const Vec3 dirs[] = {{0.6, 0.1, -0.5}, {-0.2, 0.7, -0.4}, {-0.5, -0.3, -0.9}};
  for (int i = 0; i < 3; ++i) {
    const Vec3 o = origins[i];
    const Vec3 d = dirs[i].normalized();
    const double t = (c0 + a * o.x() + bb * o.y() - o.z()) / (d.z() - a * d.x() - bb * d.y());
    const auto h = ray_heightfield_intersect(o, d, slope);
    REQUIRE(h);
    CHECK(near(h->range, t, 1e-9));
  }

  // Oblique rays onto a level field at nonzero height: the height slab has
  // zero thickness, and no ray may slip through it.
  Heightfield level = flat;
  level.heights = Raster<double>(65, 65, -0.37);
  level.cell_size = 0.0625;
  const Vec3 o(0.1, -0.2, 0.6);
  for (std::size_t i = 0; i < 2000; ++i) {
    const double az = 2 * std::numbers::pi * rng::uniform(21, i, 0);
    const double down = 0.2 + 1.2 * rng::uniform(21, i, 1);
    const Vec3 d(std::cos(down) * std::cos(az), std::cos(down) * std::sin(az), -std::sin(down));
    const double t = (o.z() + 0.37) / -d.z();
    const Vec3 p = o + t * d;
    if (std::abs(p.x()) > 1.9 || std::abs(p.y()) > 1.9) continue;
    const auto h = ray_heightfield_intersect(o, d, level);
    REQUIRE(h);
    CHECK(near(h->range, t, 1e-9));
  }
}

TEST_CASE("raycast empty scene and on-axis sphere") {
  auto k = testing::small_intrinsics(64, 33, 17);
  const auto empty = raycast(Scene{}, Pose::identity(), k);
  CHECK(image_sum(empty.image) == 0.0);
  for (double d : empty.depth.depth.values()) CHECK(d == k.range_max);

  k.range_max = 3.0;
  const auto r = raycast(sphere_scene({2, 0, 0}, 0.5), Pose::identity(), k);
  CHECK(near(r.depth.depth(8, 16), 1.5, 1e-12));
  for (double d : r.depth.depth.values()) {
    CHECK(d >= k.range_min);
    CHECK(d <= k.range_max);
  }
  for (double v : r.image.intensity.values()) CHECK(v >= 0.0);
}

TEST_CASE("roll about the axis leaves an on-axis sphere's energy unchanged") {
  auto k = testing::small_intrinsics(128, 32, 16);
  k.range_max = 3.0;
  const Scene s = sphere_scene({2, 0, 0}, 0.5);
  const double e0 = image_sum(raycast(s, Pose::identity(), k).image);
  const double e1 = image_sum(raycast(s, Pose::roll(deg2rad(7)), k).image);
  CHECK(e0 > 0.0);
  CHECK(testing::rel_near(e0, e1, 1e-6));
}

TEST_CASE("splat conserves per-ray energy") {
  auto k = testing::small_intrinsics(96, 24, 12);
  const Scene s = sphere_scene(spherical_to_euclidean({1.4, 0.05, 0.03}), 0.2);
  RenderOptions opt;
  opt.rays_per_elevation = 100;
  const auto img = raycast(s, Pose::identity(), k, opt).image;

  // Independent per-ray sum with the same fan of directions.
  double expected = 0.0;
  const double step = (k.elevation_max - k.elevation_min) / 100.0;
  for (std::size_t c = 0; c < k.azimuth_bins; ++c) {
    const double theta = k.azimuth_axis().at(static_cast<double>(c));
    for (int m = 0; m < 100; ++m) {
      const double phi = k.elevation_min + (m + 0.5) * step;
      const Vec3 dir = spherical_to_euclidean({1, theta, phi});
      const auto hit = intersect(s, Vec3::Zero(), dir);
      if (!hit || hit->range < k.range_min || hit->range > k.range_max) continue;
      expected += std::max(0.0, -dir.dot(hit->normal));
    }
  }
  CHECK(expected > 0.0);
  CHECK(testing::rel_near(image_sum(img), expected, 1e-9));
}

TEST_CASE("mirrored spheres across the zero-elevation plane image identically") {
  const auto k = testing::small_intrinsics(128, 32, 16);
  const Scene up = sphere_scene(spherical_to_euclidean({1.5, 0.1, deg2rad(4)}), 0.1);
  const Scene down = sphere_scene(spherical_to_euclidean({1.5, 0.1, deg2rad(-4)}), 0.1);
  const AcousticImage ia = raycast(up, Pose::identity(), k).image;
  const AcousticImage ib = raycast(down, Pose::identity(), k).image;
  const auto a = ia.intensity.values();
  const auto b = ib.intensity.values();
  double max_abs = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(a[i] - b[i]));
    peak = std::max(peak, a[i]);
  }
  CHECK(peak > 0.0);
  CHECK(max_abs <= 1e-9);
}

TEST_CASE("invalid scenes are rejected") {
  const auto k = testing::small_intrinsics();
  Scene mesh;
  mesh.geometry = TriangleMesh{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}};
  CHECK_THROWS_AS(raycast(mesh, Pose::identity(), k), InvalidSceneError);
  Scene bad_face;
  bad_face.geometry = TriangleMesh{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 5}}};
  CHECK_THROWS_AS(raycast(bad_face, Pose::identity(), k), InvalidSceneError);
  CHECK_THROWS_AS(raycast(sphere_scene({1, 0, 0}, 0.0), Pose::identity(), k), InvalidSceneError);
  Scene tiny;
  tiny.geometry = Heightfield{0, 0, 1, Raster<double>(1, 1, 0.0)};
  CHECK_THROWS_AS(raycast(tiny, Pose::identity(), k), InvalidSceneError);
}

TEST_CASE("add_noise") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  AcousticImage img = AcousticImage::zeros(k);
  for (std::size_t i = 0; i < img.intensity.size(); ++i) img.intensity.storage()[i] = 0.01 * i;

  CHECK(add_noise(img, {0, 0, 3}).intensity == img.intensity);
  const auto zero = AcousticImage::zeros(k);
  CHECK(add_noise(zero, {0.5, 0, 3}).intensity == zero.intensity);

  const NoiseParams p{0.2, 0.05, 42};
  const auto a = add_noise(img, p);
  const auto b = add_noise(img, p);
  CHECK(a.intensity == b.intensity);
  CHECK_FALSE(a.intensity == img.intensity);
  for (double v : a.intensity.values()) CHECK(v >= 0.0);
  CHECK_FALSE(add_noise(img, {0.2, 0.05, 43}).intensity == a.intensity);
}

TEST_CASE("make_terrain") {
  const Scene flat = make_terrain(5, 4, 0.0, 4.0, 33);
  for (double h : std::get<Heightfield>(flat.geometry).heights.values()) CHECK(h == 0.0);

  const auto h1 = std::get<Heightfield>(make_terrain(9, 5, 0.3, 4.0, 33).geometry).heights;
  const auto h2 = std::get<Heightfield>(make_terrain(9, 5, 0.3, 4.0, 33).geometry).heights;
  CHECK(h1 == h2);
  CHECK_THROWS_AS(make_terrain(9, 0, 0.3, 4.0, 33), ConfigError);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    double prev = -1.0;
    for (double amp : {0.05, 0.1, 0.2, 0.4}) {
      const double s = height_std(make_terrain(seed, 5, amp, 4.0, 33));
      CHECK(s > prev);
      prev = s;
    }
  }
}

TEST_CASE("make_sphere_scene") {
  const auto k = SonarIntrinsics::defaults();
  const Scene a = make_sphere_scene(11, k, 0.1, 0.25);
  const Scene b = make_sphere_scene(11, k, 0.1, 0.25);
  const auto& sa = std::get<SphereShape>(a.geometry);
  const auto& sb = std::get<SphereShape>(b.geometry);
  CHECK(sa.center == sb.center);
  CHECK(sa.radius == sb.radius);

  const double r_mid = 0.5 * (k.range_min + k.range_max);
  std::set<int> octants;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = std::get<SphereShape>(make_sphere_scene(seed, k, 0.1, 0.25).geometry);
    const auto p = euclidean_to_spherical(s.center).point;
    CHECK(in_scope(p, k));
    octants.insert((p.range > r_mid) * 4 + (p.azimuth > 0) * 2 + (p.elevation > 0));
  }
  CHECK(octants.size() >= 8 * 0.9);

  auto narrow = k;
  narrow.elevation_min = -0.01;
  narrow.elevation_max = 0.01;
  narrow.range_max = 0.6;
  CHECK_THROWS_AS(make_sphere_scene(1, narrow, 0.2, 0.25), ConfigError);
}

TEST_CASE("generate_pair") {
  const auto k = testing::small_intrinsics(128, 32, 16);
  const Scene s = make_sphere_scene(4, k, 0.1, 0.25);
  const NoiseParams quiet{};
  const auto same = generate_pair(s, Pose::identity(), 0.0, k, quiet);
  CHECK(same.reference.intensity == same.source.intensity);

  const double delta = deg2rad(7);
  const auto pair = generate_pair(s, Pose::identity(), delta, k, quiet);
  CHECK((pair.ref_to_src.inverse() * pair.ref_to_src).approx_equal(Pose::identity(), 1e-12));
  CHECK(pair.ref_to_src.approx_equal(Pose::roll(-delta), 1e-12));
  const auto rerender = raycast(s, Pose::roll(delta), k).image;
  CHECK(pair.source.intensity == rerender.intensity);
  CHECK_FALSE(pair.source.intensity == pair.reference.intensity);
}

TEST_CASE("rendering is deterministic across thread counts") {
  const auto k = testing::small_intrinsics(64, 16, 8);
  const Scene t = make_terrain(3, 5, 0.3, 8.0, 65);
  const Pose pose = Pose::translation({0, 0, 0.6}) * Pose::pitch(deg2rad(25));
  RenderOptions one;
  one.threads = 1;
  RenderOptions many;
  many.threads = 4;
  const auto a = raycast(t, pose, k, one);
  const auto b = raycast(t, pose, k, many);
  CHECK(a.image.intensity == b.image.intensity);
  CHECK(a.depth.depth == b.depth.depth);
}

}
