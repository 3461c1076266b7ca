#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "sonarmvs/errors.hpp"
#include "sonarmvs/planesweep.hpp"
#include "sonarmvs/simulator.hpp"

using namespace sonarmvs;
using testing::near;

namespace {

AcousticImage textured_image(const SonarIntrinsics& k, std::uint64_t seed) {
  AcousticImage img = AcousticImage::zeros(k);
  for (std::size_t r = 0; r < k.range_bins; ++r) {
    for (std::size_t c = 0; c < k.azimuth_bins; ++c) {
      img.intensity(r, c) = rng::uniform(seed, r, c);
    }
  }
  return img;
}

FeatureVolume single_cell_volume(double value) {
  FeatureVolume v;
  v.channels = {Volume<double>(1, 1, 1, value)};
  v.support = Volume<double>(1, 1, 1, 1.0);
  v.valid = Volume<std::uint8_t>(1, 1, 1, 1);
  return v;
}

// Bilinear sample of a raster at fractional (row, col) inside the grid.
double bilinear(const Raster<double>& img, double fr, double fc) {
  const auto r0 = std::min<std::size_t>(static_cast<std::size_t>(fr), img.rows() - 2);
  const auto c0 = std::min<std::size_t>(static_cast<std::size_t>(fc), img.cols() - 2);
  const double a = fr - static_cast<double>(r0);
  const double b = fc - static_cast<double>(c0);
  return (1 - a) * (1 - b) * img(r0, c0) + (1 - a) * b * img(r0, c0 + 1) +
         a * (1 - b) * img(r0 + 1, c0) + a * b * img(r0 + 1, c0 + 1);
}

}  // namespace

TEST_SUITE("planesweep") {

TEST_CASE("extract_features modes") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const AcousticImage img = textured_image(k, 1);
  const FeatureImage f = extract_features(img, FeatureMode::kIntensity, 1);
  REQUIRE(f.channel_count() == 1);
  CHECK(f.channels[0] == img.intensity);

  AcousticImage flat = AcousticImage::zeros(k);
  flat.intensity.fill(1.0);
  const FeatureImage ps = extract_features(flat, FeatureMode::kPatchStats, 1);
  REQUIRE(ps.channel_count() == 2);
  for (double v : ps.channels[0].values()) CHECK(v == 1.0);
  for (double v : ps.channels[1].values()) CHECK(v == 0.0);

  AcousticImage ramp = AcousticImage::zeros(k);
  for (std::size_t r = 0; r < k.range_bins; ++r) {
    for (std::size_t c = 0; c < k.azimuth_bins; ++c) ramp.intensity(r, c) = 0.25 * r + 3.0;
  }
  const FeatureImage g = extract_features(ramp, FeatureMode::kGradient, 1);
  for (double v : g.channels[0].values()) CHECK(near(v, 0.25, 1e-12));
  for (double v : g.channels[1].values()) CHECK(v == 0.0);

  const FeatureImage d2 = extract_features(img, FeatureMode::kIntensity, 2);
  CHECK(d2.rows() == 16);
  CHECK(d2.cols() == 8);
  const double box = (img.intensity(2, 4) + img.intensity(2, 5) + img.intensity(3, 4) +
                      img.intensity(3, 5)) / 4;
  CHECK(near(d2.channels[0](1, 2), box, 1e-15));
  CHECK_THROWS_AS(extract_features(img, FeatureMode::kIntensity, 3), ConfigError);
  CHECK_THROWS_AS(parse_feature_mode("learned"), ConfigError);
  CHECK(parse_feature_mode(to_string(FeatureMode::kGradient)) == FeatureMode::kGradient);
}

TEST_CASE("elevation_plane_angles") {
  auto k = testing::small_intrinsics();
  k.elevation_planes = 2;
  k.elevation_min = -0.1;
  k.elevation_max = 0.1;
  const auto two = elevation_plane_angles(k);
  CHECK(two == std::vector<double>{-0.1, 0.1});

  k.elevation_planes = 5;
  k.elevation_min = deg2rad(-14);
  k.elevation_max = deg2rad(14);
  const auto five = elevation_plane_angles(k);
  CHECK(five[0] == k.elevation_min);
  CHECK(near(five[2], 0.0, 1e-15));

  k.elevation_planes = 1;
  CHECK_THROWS_AS(elevation_plane_angles(k), ConfigError);
}

TEST_CASE("identity warp reproduces the source on every plane") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const FeatureImage f = extract_features(textured_image(k, 2), FeatureMode::kPatchStats, 1);
  for (double phi : elevation_plane_angles(k)) {
    const WarpedSlice s = warp_to_plane(f, Pose::identity(), phi, k);
    CHECK(s.channels[0] == f.channels[0]);
    CHECK(s.channels[1] == f.channels[1]);
    for (auto v : s.valid.values()) CHECK(v == 1);
  }
  const FeatureVolume vol = build_volume(f, Pose::identity(), k);
  CHECK(vol.channel_count() == 2);
  CHECK(vol.planes() == k.elevation_planes);
  CHECK(vol.rows() == 32);
  CHECK(vol.cols() == 16);
  const std::vector<FeatureVolume> pair{vol, vol};
  const CostVolume c = aggregate_variance(pair);
  for (double v : c.cost.values()) CHECK(v == 0.0);
}

TEST_CASE("roll by pi mirrors elevation and azimuth") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const FeatureImage f = extract_features(textured_image(k, 3), FeatureMode::kIntensity, 1);
  const Pose flip = Pose::roll(std::numbers::pi);
  const auto planes = elevation_plane_angles(k);
  const std::size_t n = planes.size();
  for (std::size_t j = 0; j < n; ++j) {
    const WarpedSlice s = warp_to_plane(f, flip, planes[j], k);
    const WarpedSlice m = warp_to_plane(f, flip, planes[n - 1 - j], k);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t c = 0; c < f.cols(); ++c) {
        // (r, theta, phi) -> (r, -theta, -phi): sample the source at -theta.
        const double theta = f.azimuth.at(static_cast<double>(c));
        const double expect = bilinear(f.channels[0], static_cast<double>(r),
                                       f.azimuth.index_of(-theta));
        REQUIRE(s.valid(r, c) == 1);
        CHECK(near(s.channels[0](r, c), expect, 1e-9));
        CHECK(near(s.channels[0](r, c), m.channels[0](r, c), 1e-9));
      }
    }
  }
}

TEST_CASE("far translation leaves nothing valid") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const FeatureImage f = extract_features(textured_image(k, 4), FeatureMode::kIntensity, 1);
  const WarpedSlice s = warp_to_plane(f, Pose::translation({10, 0, 0}), 0.0, k);
  for (auto v : s.valid.values()) CHECK(v == 0);
  for (double v : s.channels[0].values()) CHECK(v == 0.0);
}

TEST_CASE("warp is linear in the image") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const AcousticImage a = textured_image(k, 5);
  const AcousticImage b = textured_image(k, 6);
  AcousticImage mix = a;
  for (std::size_t i = 0; i < mix.intensity.size(); ++i) {
    mix.intensity.storage()[i] = 2.0 * a.intensity.storage()[i] - 0.5 * b.intensity.storage()[i];
  }
  const Pose pose = Pose::roll(deg2rad(7)) * Pose::translation({0.02, -0.01, 0.03});
  const auto fa = warp_to_plane(extract_features(a, FeatureMode::kIntensity), pose, 0.05, k);
  const auto fb = warp_to_plane(extract_features(b, FeatureMode::kIntensity), pose, 0.05, k);
  const auto fm = warp_to_plane(extract_features(mix, FeatureMode::kIntensity), pose, 0.05, k);
  for (std::size_t i = 0; i < fm.channels[0].size(); ++i) {
    CHECK(near(fm.channels[0].storage()[i],
               2.0 * fa.channels[0].storage()[i] - 0.5 * fb.channels[0].storage()[i], 1e-12));
  }
}

TEST_CASE("build_volume slice j equals warp_to_plane at phi_j") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const FeatureImage f = extract_features(textured_image(k, 7), FeatureMode::kPatchStats, 1);
  const Pose pose = Pose::roll(deg2rad(-7));
  const FeatureVolume vol = build_volume(f, pose, k, 3);
  const auto planes = elevation_plane_angles(k);
  for (std::size_t j = 0; j < planes.size(); ++j) {
    const WarpedSlice s = warp_to_plane(f, pose, planes[j], k);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t c = 0; c < f.cols(); ++c) {
        CHECK(vol.channels[1](j, r, c) == s.channels[1](r, c));
        CHECK(vol.valid(j, r, c) == s.valid(r, c));
      }
    }
  }
}

TEST_CASE("enlarging the source scope never invalidates a cell") {
  auto k = testing::small_intrinsics(32, 16, 8);
  const FeatureImage f = extract_features(textured_image(k, 8), FeatureMode::kIntensity, 1);
  auto wide = k;
  wide.elevation_min *= 1.5;
  wide.elevation_max *= 1.5;
  const Pose pose = Pose::roll(deg2rad(7));
  for (double phi : elevation_plane_angles(k)) {
    const auto narrow_slice = warp_to_plane(f, pose, phi, k);
    const auto wide_slice = warp_to_plane(f, pose, phi, wide);
    for (std::size_t i = 0; i < narrow_slice.valid.size(); ++i) {
      if (narrow_slice.valid.storage()[i]) CHECK(wide_slice.valid.storage()[i] == 1);
    }
  }
}

TEST_CASE("aggregate_variance hand cases") {
  {
    const std::vector<FeatureVolume> v{single_cell_volume(1), single_cell_volume(3)};
    CHECK(aggregate_variance(v).cost(0, 0, 0) == 1.0);
  }
  {
    const std::vector<FeatureVolume> v{single_cell_volume(1), single_cell_volume(2),
                                       single_cell_volume(3)};
    CHECK(near(aggregate_variance(v).cost(0, 0, 0), 2.0 / 3.0, 1e-15));
  }
  const std::vector<FeatureVolume> one{single_cell_volume(1)};
  CHECK_THROWS_AS(aggregate_variance(one), DataError);
  FeatureVolume other = single_cell_volume(1);
  other.channels[0] = Volume<double>(2, 1, 1, 0.0);
  other.valid = Volume<std::uint8_t>(2, 1, 1, 1);
  const std::vector<FeatureVolume> mismatch{single_cell_volume(1), other};
  CHECK_THROWS_AS(aggregate_variance(mismatch), DataError);
}

TEST_CASE("aggregate_variance invalid cells, permutation and sign") {
  const auto k = testing::small_intrinsics(32, 16, 8);
  const auto ref = build_volume(extract_features(textured_image(k, 9), FeatureMode::kPatchStats),
                                Pose::identity(), k);
  const auto s1 = build_volume(extract_features(textured_image(k, 10), FeatureMode::kPatchStats),
                               Pose::roll(deg2rad(7)), k);
  const auto s2 = build_volume(extract_features(textured_image(k, 11), FeatureMode::kPatchStats),
                               Pose::roll(deg2rad(-7)), k);
  const std::vector<FeatureVolume> abc{ref, s1, s2};
  const std::vector<FeatureVolume> cab{s2, ref, s1};
  const CostVolume x = aggregate_variance(abc);
  const CostVolume y = aggregate_variance(cab);
  double max_cost = 0.0;
  bool any_invalid = false;
  for (std::size_t i = 0; i < x.cost.size(); ++i) {
    CHECK(near(x.cost.storage()[i], y.cost.storage()[i], 1e-12));
    CHECK(x.cost.storage()[i] >= 0.0);
    if (x.informative.storage()[i]) max_cost = std::max(max_cost, x.cost.storage()[i]);
    else any_invalid = true;
  }
  CHECK(any_invalid);
  for (std::size_t i = 0; i < x.cost.size(); ++i) {
    if (!x.informative.storage()[i]) CHECK(x.cost.storage()[i] == max_cost);
    if (x.valid_count.storage()[i] < 2) CHECK(x.informative.storage()[i] == 0);
  }
}

}
