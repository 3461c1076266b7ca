#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "sonarmvs/errors.hpp"
#include "sonarmvs/metrics.hpp"

using namespace sonarmvs;
using testing::near;

namespace {

PointCloud random_cloud(std::uint64_t seed, std::size_t n, double scale = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(scale * rng::uniform(seed, i, 0), scale * rng::uniform(seed, i, 1),
                          scale * rng::uniform(seed, i, 2));
  }
  return c;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("depth_map_to_point_cloud") {
  auto k = testing::small_intrinsics();
  FrontDepthMap d = FrontDepthMap::filled(k, 3, 3, 1.0);
  d.elevation = Axis{-0.1, 0.1, 3};
  d.azimuth = Axis{-0.2, 0.2, 3};
  DepthMask m{Raster<std::uint8_t>(3, 3, 0)};
  CHECK(depth_map_to_point_cloud(d, m).empty());

  m.mask(1, 1) = 1;
  const PointCloud one = depth_map_to_point_cloud(d, m);
  REQUIRE(one.size() == 1);
  CHECK(one.points[0] == Vec3(1, 0, 0));

  m.mask(0, 2) = 1;
  m.mask(2, 0) = 1;
  const Pose pose = Pose::translation({1, 2, 3}) * Pose::yaw(0.3);
  const PointCloud world = depth_map_to_point_cloud(d, m, pose, CloudFrame::kWorld);
  CHECK(world.size() == m.count());
  CHECK(world.frame == CloudFrame::kWorld);
  const Vec3 expect = pose.apply(spherical_to_euclidean({1.0, 0.2, -0.1}));
  bool found = false;
  for (const auto& p : world.points) found = found || (p - expect).norm() < 1e-12;
  CHECK(found);
  CHECK_THROWS_AS(depth_map_to_point_cloud(d, DepthMask{Raster<std::uint8_t>(2, 3, 1)}),
                  DataError);
}

TEST_CASE("mae") {
  const auto k = testing::small_intrinsics();
  const FrontDepthMap gt = FrontDepthMap::filled(k, 4, 5, 1.0);
  CHECK(mae(gt, gt) == 0.0);
  FrontDepthMap est = gt;
  for (std::size_t i = 0; i < est.depth.size(); ++i) {
    est.depth.storage()[i] += (i % 2 ? 0.01 : -0.01);
  }
  CHECK(near(mae(est, gt), 10.0, 1e-9));
  FrontDepthMap twice = gt;
  for (std::size_t i = 0; i < twice.depth.size(); ++i) {
    twice.depth.storage()[i] += 2 * (est.depth.storage()[i] - gt.depth.storage()[i]);
  }
  CHECK(near(mae(twice, gt), 2 * mae(est, gt), 1e-9));

  // Shifting every estimate by delta: exactly beta * delta when signs agree.
  FrontDepthMap above = gt;
  for (double& v : above.depth.storage()) v += 0.03;
  FrontDepthMap shifted = above;
  for (double& v : shifted.depth.storage()) v += 0.02;
  CHECK(near(mae(shifted, gt) - mae(above, gt), 1000 * 0.02, 1e-9));
  FrontDepthMap mixed = est;
  for (double& v : mixed.depth.storage()) v += 0.005;
  CHECK(std::abs(mae(mixed, gt) - mae(est, gt)) <= 1000 * 0.005 + 1e-9);
  CHECK_THROWS_AS(mae(FrontDepthMap::filled(k, 3, 5, 1.0), gt), DataError);
}

TEST_CASE("chamfer hand cases") {
  const PointCloud a{{Vec3(0, 0, 0)}};
  const PointCloud b{{Vec3(1, 0, 0)}};
  CHECK(chamfer_bruteforce(a, b) == 1000.0);
  CHECK(chamfer_fast(a, b) == 1000.0);
  const PointCloud c = random_cloud(1, 50);
  const PointCloud d = random_cloud(2, 70);
  CHECK(chamfer_bruteforce(c, c) == 0.0);
  CHECK(chamfer_fast(c, c) == 0.0);
  CHECK(chamfer_bruteforce(c, d) == doctest::Approx(chamfer_bruteforce(d, c)).epsilon(1e-12));
  CHECK(chamfer_bruteforce(c, d) > 0.0);
  CHECK_THROWS_AS(chamfer_bruteforce(PointCloud{}, c), DataError);
  CHECK_THROWS_AS(chamfer_fast(c, PointCloud{}), DataError);

  // Zero iff each set is contained in the other.
  PointCloud dup = c;
  dup.points.push_back(c.points[3]);
  CHECK(chamfer_fast(c, dup) == 0.0);
}

TEST_CASE("chamfer_fast matches brute force") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointCloud a = random_cloud(seed * 2 + 10, 400, 2.0);
    const PointCloud b = random_cloud(seed * 2 + 11, 300, 2.0);
    const double slow = chamfer_bruteforce(a, b);
    CHECK(testing::rel_near(chamfer_fast(a, b, kChamferScale, 1), slow, 1e-9));
    CHECK(testing::rel_near(chamfer_fast(a, b, kChamferScale, 3), slow, 1e-9));
  }
  // Duplicate coordinates and a degenerate (planar) set.
  PointCloud flat;
  for (int i = 0; i < 200; ++i) flat.points.emplace_back(i % 10, i / 10, 0.0);
  flat.points.emplace_back(3, 3, 0);
  const PointCloud q = random_cloud(99, 150, 10.0);
  CHECK(testing::rel_near(chamfer_fast(flat, q), chamfer_bruteforce(flat, q), 1e-9));
}

TEST_CASE("chamfer is invariant under a common rigid motion") {
  const PointCloud a = random_cloud(3, 200);
  const PointCloud b = random_cloud(4, 150);
  const Pose t = Pose::translation({5, -2, 1}) * Pose::roll(0.4) * Pose::yaw(-1.2);
  PointCloud ta = a;
  PointCloud tb = b;
  for (auto& p : ta.points) p = t.apply(p);
  for (auto& p : tb.points) p = t.apply(p);
  CHECK(testing::rel_near(chamfer_fast(ta, tb), chamfer_fast(a, b), 1e-9));
}

TEST_CASE("KdTree nearest neighbour") {
  const PointCloud a = random_cloud(5, 500);
  const KdTree tree(a.points);
  CHECK(tree.size() == 500);
  for (std::size_t i = 0; i < 50; ++i) {
    const Vec3 q(rng::uniform(77, i, 0) * 1.4 - 0.2, rng::uniform(77, i, 1), rng::uniform(77, i, 2));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a.points) best = std::min(best, (p - q).squaredNorm());
    CHECK(tree.nearest_squared_distance(q) == best);
  }
  const KdTree empty(std::span<const Vec3>{});
  CHECK(std::isinf(empty.nearest_squared_distance(Vec3::Zero())));
}

}
