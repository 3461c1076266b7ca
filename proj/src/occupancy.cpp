#include "sonarmvs/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sonarmvs/errors.hpp"
#include "sonarmvs/parallel.hpp"

namespace sonarmvs {

InverseSensorModel InverseSensorModel::for_image(const AcousticImage& img) {
  InverseSensorModel m;
  const auto v = img.intensity.values();
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  m.intensity_threshold = 0.5 * peak;
  return m;
}

OccupancyGrid::OccupancyGrid(const Vec3& origin, double cell_size, std::size_t nx,
                             std::size_t ny, std::size_t nz)
    : origin_(origin), cell_size_(cell_size), nx_(nx), ny_(ny), nz_(nz),
      log_odds_(nx * ny * nz, 0.0) {
  if (!(cell_size > 0.0)) throw ConfigError("occupancy grid cell size must be > 0");
}

OccupancyGrid OccupancyGrid::covering(const SonarIntrinsics& k, double cell_size) {
  k.validate();
  if (!(cell_size > 0.0)) cell_size = (k.range_max - k.range_min) / 256.0;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  // The scope's bounding box is attained on its boundary; sample it densely
  // enough to include the on-axis extremes.
  constexpr int kSteps = 16;
  for (double r : {k.range_min, k.range_max}) {
    for (int a = 0; a <= kSteps; ++a) {
      const double theta = k.azimuth_min + (k.azimuth_max - k.azimuth_min) * a / kSteps;
      for (int b = 0; b <= kSteps; ++b) {
        const double phi = k.elevation_min + (k.elevation_max - k.elevation_min) * b / kSteps;
        const Vec3 p = spherical_to_euclidean({r, theta, phi});
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
  }
  if (k.azimuth_min <= 0.0 && k.azimuth_max >= 0.0 && k.elevation_min <= 0.0 &&
      k.elevation_max >= 0.0) {
    hi.x() = std::max(hi.x(), k.range_max);
  }
  const Vec3 extent = hi - lo;
  auto cells = [&](double e) { return static_cast<std::size_t>(std::ceil(e / cell_size)) + 1; };
  return OccupancyGrid(lo, cell_size, cells(extent.x()), cells(extent.y()), cells(extent.z()));
}

Vec3 OccupancyGrid::cell_center(std::size_t ix, std::size_t iy, std::size_t iz) const {
  return origin_ + cell_size_ * Vec3(static_cast<double>(ix) + 0.5, static_cast<double>(iy) + 0.5,
                                     static_cast<double>(iz) + 0.5);
}

OccupancyGrid integrate_view(const OccupancyGrid& grid, const AcousticImage& img,
                             const Pose& ref_to_frame, const InverseSensorModel& model,
                             unsigned threads) {
  const SonarIntrinsics& k = img.intrinsics;
  const Axis range_axis = k.range_axis();
  const Axis azimuth_axis = k.azimuth_axis();
  const std::size_t rows = k.range_bins;
  const std::size_t cols = k.azimuth_bins;

  // First above-threshold row per azimuth column (rows when there is none).
  std::vector<std::size_t> first_return(cols, rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (img.intensity(r, c) > model.intensity_threshold) {
        first_return[c] = r;
        break;
      }
    }
  }

  OccupancyGrid out = grid;
  parallel_for(grid.nz(), threads, [&](std::size_t iz) {
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const Vec3 p = ref_to_frame.apply(grid.cell_center(ix, iy, iz));
        const double range = p.norm();
        if (!(range > 0.0)) continue;
        const SphericalPoint s{range, std::atan2(p.y(), p.x()),
                               std::atan2(p.z(), std::hypot(p.x(), p.y()))};
        if (!in_scope(s, k)) continue;
        const auto row = static_cast<std::size_t>(
            std::clamp(std::lround(range_axis.index_of(s.range)), 0L, static_cast<long>(rows - 1)));
        const auto col = static_cast<std::size_t>(std::clamp(
            std::lround(azimuth_axis.index_of(s.azimuth)), 0L, static_cast<long>(cols - 1)));
        double delta = 0.0;
        if (img.intensity(row, col) > model.intensity_threshold) delta += model.l_occ;
        if (row < first_return[col]) delta += model.l_free;
        if (delta == 0.0) continue;
        double& v = out.at(ix, iy, iz);
        v = std::clamp(v + delta, -model.clamp, model.clamp);
      }
    }
  });
  return out;
}

PointCloud extract_surface(const OccupancyGrid& grid, double threshold) {
  PointCloud cloud;
  for (std::size_t iz = 0; iz < grid.nz(); ++iz) {
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        if (grid.at(ix, iy, iz) > threshold) cloud.points.push_back(grid.cell_center(ix, iy, iz));
      }
    }
  }
  return cloud;
}

}  // namespace sonarmvs
