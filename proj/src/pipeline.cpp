#include "sonarmvs/pipeline.hpp"

#include <algorithm>
#include <limits>

#include "sonarmvs/errors.hpp"

namespace sonarmvs {

SonarIntrinsics sweep_intrinsics(const SonarIntrinsics& k, const ReconstructParams& params) {
  SonarIntrinsics out = k;
  if (params.planes != 0) out.elevation_planes = params.planes;
  out.validate();
  return out;
}

Reconstruction reconstruct(const AcousticImage& reference, std::span<const AcousticImage> sources,
                           std::span<const Pose> ref_to_sources, const Axis& out_elevation,
                           const Axis& out_azimuth, const ReconstructParams& params) {
  if (sources.empty()) throw DataError("reconstruct needs at least one source image");
  if (sources.size() != ref_to_sources.size()) {
    throw DataError("reconstruct: one relative pose per source image is required");
  }
  const SonarIntrinsics k = sweep_intrinsics(reference.intrinsics, params);
  for (const auto& s : sources) {
    if (s.intensity.rows() != reference.intensity.rows() ||
        s.intensity.cols() != reference.intensity.cols()) {
      throw DataError("reconstruct: source and reference images differ in shape");
    }
  }

  const FeatureImage ref_features = extract_features(reference, params.feature_mode, params.downsample);
  std::vector<FeatureVolume> volumes;
  volumes.reserve(sources.size() + 1);
  volumes.push_back(build_volume(ref_features, Pose::identity(), k, params.threads));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const FeatureImage f = extract_features(sources[i], params.feature_mode, params.downsample);
    const Pose pose = params.warp ? ref_to_sources[i] : Pose::identity();
    volumes.push_back(build_volume(f, pose, k, params.threads));
  }

  const auto support = ref_features.support.values();
  const double peak = support.empty() ? 0.0 : *std::max_element(support.begin(), support.end());
  AggregateOptions aggregate;
  aggregate.signal_floor = params.signal_floor * peak;
  const CostVolume cost = smooth_volume(aggregate_variance(volumes, aggregate), params.sigma,
                                        params.threads);

  Reconstruction out;
  out.tau = params.tau > 0.0 ? params.tau : params.temperature_scale * default_temperature(cost);
  ScoreVolume score = score_volume(cost, out.tau);
  if (params.localize) {
    score = localize_elevation(score, cost.informative, params.elevation_width, params.threads);
  }
  out.score = upsample_volume(score, params.upsample);
  const FrontDepthMap depth = suppress_unsupported(soft_argmax_depth(out.score, k), out.score,
                                                   params.min_peak_score);
  out.depth = resample_depth(depth, out_elevation, out_azimuth);
  out.depth.intrinsics = reference.intrinsics;
  return out;
}

PointCloud baseline_reconstruct(const AcousticImage& reference,
                                std::span<const AcousticImage> sources,
                                std::span<const Pose> ref_to_sources,
                                const BaselineParams& params) {
  if (sources.size() != ref_to_sources.size()) {
    throw DataError("baseline: one relative pose per source image is required");
  }
  OccupancyGrid grid = OccupancyGrid::covering(reference.intrinsics, params.cell_size);
  grid = integrate_view(grid, reference, Pose::identity(), InverseSensorModel::for_image(reference),
                        params.threads);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    grid = integrate_view(grid, sources[i], ref_to_sources[i],
                          InverseSensorModel::for_image(sources[i]), params.threads);
  }
  return extract_surface(grid, params.surface_threshold);
}

double cloud_chamfer(const PointCloud& estimate, const FrontDepthMap& truth, unsigned threads) {
  const FrontDepthMap gt = clamp_gt(truth);
  const PointCloud gt_cloud = depth_map_to_point_cloud(gt, make_mask(gt));
  if (estimate.empty() || gt_cloud.empty()) return std::numeric_limits<double>::quiet_NaN();
  return chamfer_fast(estimate, gt_cloud, kChamferScale, threads);
}

DepthMetrics evaluate_depth(const FrontDepthMap& estimate, const FrontDepthMap& truth,
                            unsigned threads) {
  const FrontDepthMap gt = clamp_gt(truth);
  const PointCloud est_cloud = depth_map_to_point_cloud(estimate, make_mask(estimate));
  DepthMetrics m;
  m.mae = mae(estimate, gt);
  m.estimate_points = est_cloud.size();
  m.truth_points = make_mask(gt).count();
  m.chamfer = cloud_chamfer(est_cloud, gt, threads);
  return m;
}

}  // namespace sonarmvs
