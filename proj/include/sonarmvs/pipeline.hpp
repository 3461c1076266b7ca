#pragma once

#include <span>
#include <vector>

#include "sonarmvs/frontdepth.hpp"
#include "sonarmvs/geometry.hpp"
#include "sonarmvs/metrics.hpp"
#include "sonarmvs/occupancy.hpp"
#include "sonarmvs/planesweep.hpp"
#include "sonarmvs/regularize.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

struct ReconstructParams {
  FeatureMode feature_mode = FeatureMode::kPatchStats;
  std::size_t downsample = 1;
  /// Elevation planes; 0 uses the intrinsics' plane count.
  std::size_t planes = 0;
  SmoothingSigma sigma;
  /// Softmax temperature; 0 selects temperature_scale * default_temperature of
  /// the smoothed volume.
  double tau = 0.0;
  double temperature_scale = 0.02;
  /// Per-pixel elevation localization (see localize_elevation); false keeps
  /// the plain negated-cost score.
  bool localize = true;
  /// Gaussian width of the localized score, radians.
  double elevation_width = 0.025;
  UpsampleFactors upsample;
  /// Fraction of the reference's peak downsampled intensity below which a
  /// cell's mean intensity counts as "no signal".
  double signal_floor = 0.05;
  /// Columns whose best score stays below this are dropped from the estimate.
  double min_peak_score = -1.25;
  /// false stacks every frame unwarped (identity pose), the ablation setting.
  bool warp = true;
  unsigned threads = 0;
};

struct Reconstruction {
  FrontDepthMap depth;  // on the requested output grid
  ScoreVolume score;    // after smoothing, scoring and upsampling
  double tau = 0.0;
};

/// extract_features -> build_volume (reference and each source) ->
/// aggregate_variance -> smooth_volume -> score_volume -> upsample_volume ->
/// soft_argmax_depth -> suppress_unsupported, resampled onto the output grid.
Reconstruction reconstruct(const AcousticImage& reference, std::span<const AcousticImage> sources,
                           std::span<const Pose> ref_to_sources, const Axis& out_elevation,
                           const Axis& out_azimuth, const ReconstructParams& params = {});

/// Intrinsics used for the sweep: the image's intrinsics with the plane count
/// overridden when params.planes is set.
SonarIntrinsics sweep_intrinsics(const SonarIntrinsics& k, const ReconstructParams& params);

struct BaselineParams {
  /// <= 0 selects (r_max - r_min) / 256.
  double cell_size = 0.0;
  double surface_threshold = 0.5;
  unsigned threads = 0;
};

/// Occupancy-mapping baseline: integrates the reference and every source into
/// one grid in the reference frame and returns its surface cells.
PointCloud baseline_reconstruct(const AcousticImage& reference,
                                std::span<const AcousticImage> sources,
                                std::span<const Pose> ref_to_sources,
                                const BaselineParams& params = {});

struct DepthMetrics {
  double mae = 0.0;
  /// NaN when the estimate has no in-range cell.
  double chamfer = 0.0;
  std::size_t estimate_points = 0;
  std::size_t truth_points = 0;
};

/// MAE against the clamped ground truth, and chamfer distance between the
/// estimate's in-range cells and the ground truth's in-range cells, both
/// back-projected in the reference frame.
DepthMetrics evaluate_depth(const FrontDepthMap& estimate, const FrontDepthMap& truth,
                            unsigned threads = 0);

/// Chamfer distance of a cloud to the ground truth's in-range cells.
double cloud_chamfer(const PointCloud& estimate, const FrontDepthMap& truth,
                     unsigned threads = 0);

}  // namespace sonarmvs
