#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/raster.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

/// Classical per-pixel descriptors standing in for a learned 2D feature network.
enum class FeatureMode {
  kIntensity,   // 1 channel: box-downsampled intensity
  kPatchStats,  // 2 channels: 3x3 local mean, 3x3 local standard deviation
  kGradient,    // 2 channels: central differences along range and azimuth
};

FeatureMode parse_feature_mode(std::string_view name);
std::string to_string(FeatureMode mode);

/// C x H' x W' descriptor raster on a (possibly downsampled) polar grid.
struct FeatureImage {
  std::vector<Raster<double>> channels;
  /// Box-downsampled intensity, carried alongside the descriptors so later
  /// stages can tell "both views dark" apart from "both views agree".
  Raster<double> support;
  Axis range;
  Axis azimuth;
  std::size_t downsample_factor = 1;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t rows() const { return support.rows(); }
  std::size_t cols() const { return support.cols(); }
};

/// Throws ConfigError unless `factor` divides both H and W.
FeatureImage extract_features(const AcousticImage& img, FeatureMode mode,
                              std::size_t downsample_factor = 1);

/// phi_j = phi_min + j (phi_max - phi_min) / (N - 1), j = 0..N-1.
std::vector<double> elevation_plane_angles(const SonarIntrinsics& k);

struct WarpedSlice {
  std::vector<Raster<double>> channels;  // C x H' x W'
  Raster<double> support;
  Raster<std::uint8_t> valid;
};

/// Samples `src` at the source-frame projection of every reference grid cell
/// lifted onto elevation plane `phi`. Cells whose transformed point leaves the
/// source scope or raster are zero and invalid.
WarpedSlice warp_to_plane(const FeatureImage& src, const Pose& ref_to_src, double phi,
                          const SonarIntrinsics& k);

/// C x N x H' x W' stack of warped slices, one per elevation plane.
struct FeatureVolume {
  std::vector<Volume<double>> channels;  // each N x H' x W'
  Volume<double> support;
  Volume<std::uint8_t> valid;
  Axis range;
  Axis elevation;
  Axis azimuth;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t planes() const { return valid.dim0(); }
  std::size_t rows() const { return valid.dim1(); }
  std::size_t cols() const { return valid.dim2(); }
};

FeatureVolume build_volume(const FeatureImage& frame, const Pose& ref_to_frame,
                           const SonarIntrinsics& k, unsigned threads = 0);

struct AggregateOptions {
  /// Cells whose mean support over the valid views is below this value are
  /// treated like out-of-overlap cells. 0 disables the gate.
  double signal_floor = 0.0;
};

/// Range x elevation x azimuth cost field (Eq. 4 generalized to K views).
struct CostVolume {
  Volume<double> cost;
  Volume<std::uint8_t> valid_count;  // views that observed the cell
  Volume<std::uint8_t> informative;  // >= 2 valid views and above the signal floor
  Axis range;
  Axis elevation;
  Axis azimuth;

  std::size_t range_bins() const { return cost.dim0(); }
  std::size_t elevation_bins() const { return cost.dim1(); }
  std::size_t azimuth_bins() const { return cost.dim2(); }
};

/// Per cell: mean over channels of (1/K) sum_k (V_k - mean)^2 over the views
/// valid at that cell. Non-informative cells get the largest informative cost.
CostVolume aggregate_variance(std::span<const FeatureVolume> volumes,
                              const AggregateOptions& options = {});

}  // namespace sonarmvs
