#pragma once

#include <cstdint>

#include "sonarmvs/raster.hpp"
#include "sonarmvs/regularize.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

/// E x W informative-cell mask (1 = depth strictly inside (r_min, r_max)).
struct DepthMask {
  Raster<std::uint8_t> mask;

  std::size_t count() const;
};

/// Per (elevation, azimuth) column: sum_d d e^{s(d)} / sum_d e^{s(d)}, with d the
/// range of each score bin. Scores are shifted by the column max first.
FrontDepthMap soft_argmax_depth(const ScoreVolume& s, const SonarIntrinsics& k);

/// Range of the best-scoring bin per column; ties go to the nearer range.
FrontDepthMap hard_argmax_depth(const ScoreVolume& s, const SonarIntrinsics& k);

/// Columns whose best score is below `min_peak_score` carry no usable surface
/// evidence and are set to r_max (so make_mask drops them).
FrontDepthMap suppress_unsupported(const FrontDepthMap& depth, const ScoreVolume& s,
                                   double min_peak_score);

DepthMask make_mask(const FrontDepthMap& gt);

/// Values above r_max become r_max and values below r_min become r_min.
FrontDepthMap clamp_gt(const FrontDepthMap& gt);

/// (1/n) sum [lambda M |est - gt| + (1 - M) |est - gt|], M = make_mask(gt).
double masked_l1_loss(const FrontDepthMap& est, const FrontDepthMap& gt, double lambda);

/// Bilinear resampling of a depth map onto another elevation/azimuth grid
/// (coordinates outside the source grid are clamped to its border).
FrontDepthMap resample_depth(const FrontDepthMap& depth, const Axis& elevation,
                             const Axis& azimuth);

}  // namespace sonarmvs
