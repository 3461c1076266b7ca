#pragma once

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/raster.hpp"

namespace sonarmvs {

/// Range x azimuth intensity raster. Row 0 is the nearest range bin.
struct AcousticImage {
  SonarIntrinsics intrinsics;
  Raster<double> intensity;

  static AcousticImage zeros(const SonarIntrinsics& k) {
    return {k, Raster<double>(k.range_bins, k.azimuth_bins, 0.0)};
  }
};

/// Elevation x azimuth raster of first-return ranges (pseudo front depth).
/// Rows and columns sample the elevation and azimuth extents with aligned corners.
struct FrontDepthMap {
  SonarIntrinsics intrinsics;
  Axis elevation;
  Axis azimuth;
  Raster<double> depth;

  std::size_t rows() const { return depth.rows(); }
  std::size_t cols() const { return depth.cols(); }

  /// E x W map over the full scope, every cell set to `value`.
  static FrontDepthMap filled(const SonarIntrinsics& k, std::size_t rows, std::size_t cols,
                              double value) {
    return {k,
            Axis{k.elevation_min, k.elevation_max, rows},
            Axis{k.azimuth_min, k.azimuth_max, cols},
            Raster<double>(rows, cols, value)};
  }
};

}  // namespace sonarmvs
