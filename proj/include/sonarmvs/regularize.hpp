#pragma once

#include <cstddef>
#include <cstdint>

#include "sonarmvs/planesweep.hpp"
#include "sonarmvs/raster.hpp"

namespace sonarmvs {

/// Range x elevation x azimuth occupancy-like score (higher = more likely a
/// surface); the input to depth extraction.
struct ScoreVolume {
  Volume<double> score;
  Axis range;
  Axis elevation;
  Axis azimuth;

  std::size_t range_bins() const { return score.dim0(); }
  std::size_t elevation_bins() const { return score.dim1(); }
  std::size_t azimuth_bins() const { return score.dim2(); }
};

/// Gaussian widths in bins per axis; 0 skips the axis.
struct SmoothingSigma {
  double range = 2.0;
  double elevation = 1.0;
  double azimuth = 1.0;
};

struct UpsampleFactors {
  std::size_t range = 1;
  std::size_t elevation = 1;
  std::size_t azimuth = 1;
};

/// Normalized 1D Gaussian truncated at ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with reflected boundaries. Only informative cells
/// contribute (normalized convolution); non-informative cells are reset to the
/// largest smoothed informative cost afterwards. With every cell informative
/// this is a plain separable convolution.
CostVolume smooth_volume(const CostVolume& c, const SmoothingSigma& sigma, unsigned threads = 0);

/// Mean of the strictly positive informative costs (1 if there are none).
double default_temperature(const CostVolume& c);

/// score = -cost / tau. Throws ConfigError for tau <= 0.
ScoreVolume score_volume(const CostVolume& c, double tau);

/// Score of a cell with no usable evidence after localize_elevation.
inline constexpr double kNoEvidenceScore = -100.0;

/// Each (range, azimuth) pixel of a sonar image is one return, produced by a
/// single elevation. Per pixel, forms the elevation posterior
/// p(j) ~ exp(score(d, j, c)) over its informative cells, takes its mean
/// elevation mu and rescores the pixel as -(phi_j - mu)^2 / (2 width^2).
/// Non-informative cells, and pixels without any informative cell, get
/// kNoEvidenceScore. `width` is in radians.
ScoreVolume localize_elevation(const ScoreVolume& s, const Volume<std::uint8_t>& informative,
                               double width, unsigned threads = 0);

/// Trilinear interpolation with aligned corners; an axis of n bins becomes
/// (n - 1) * factor + 1 so the original samples are kept exactly.
ScoreVolume upsample_volume(const ScoreVolume& s, const UpsampleFactors& factors);

}  // namespace sonarmvs
