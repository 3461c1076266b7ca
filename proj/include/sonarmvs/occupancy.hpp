#pragma once

#include <cstddef>
#include <vector>

#include "sonarmvs/geometry.hpp"
#include "sonarmvs/metrics.hpp"
#include "sonarmvs/sonar_types.hpp"

namespace sonarmvs {

/// Inverse sensor model parameters. Log-odds increments per observation.
struct InverseSensorModel {
  double l_free = -0.4;
  double l_occ = 0.85;
  double intensity_threshold = 0.0;
  double clamp = 10.0;

  /// Defaults with the threshold at half the image's peak intensity.
  static InverseSensorModel for_image(const AcousticImage& img);
};

/// Axis-aligned log-odds grid in the reference sensor frame.
class OccupancyGrid {
 public:
  OccupancyGrid(const Vec3& origin, double cell_size, std::size_t nx, std::size_t ny,
                std::size_t nz);

  /// Grid covering the bounding box of the sonar scope. cell_size <= 0 selects
  /// (r_max - r_min) / 256.
  static OccupancyGrid covering(const SonarIntrinsics& k, double cell_size = 0.0);

  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t nz() const { return nz_; }
  std::size_t cell_count() const { return log_odds_.size(); }

  Vec3 cell_center(std::size_t ix, std::size_t iy, std::size_t iz) const;
  double& at(std::size_t ix, std::size_t iy, std::size_t iz) {
    return log_odds_[(iz * ny_ + iy) * nx_ + ix];
  }
  double at(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return log_odds_[(iz * ny_ + iy) * nx_ + ix];
  }
  const std::vector<double>& log_odds() const { return log_odds_; }

 private:
  Vec3 origin_;
  double cell_size_;
  std::size_t nx_;
  std::size_t ny_;
  std::size_t nz_;
  std::vector<double> log_odds_;
};

/// Updates every in-scope cell from one view: l_occ where the image is above
/// threshold at the cell's (r, theta) (any elevation could have produced the
/// return), l_free where the cell lies nearer than the first above-threshold
/// return of its azimuth column. Log-odds are clamped to +-model.clamp.
OccupancyGrid integrate_view(const OccupancyGrid& grid, const AcousticImage& img,
                             const Pose& ref_to_frame, const InverseSensorModel& model,
                             unsigned threads = 0);

/// Centers of cells whose log-odds exceed `threshold`.
PointCloud extract_surface(const OccupancyGrid& grid, double threshold);

}  // namespace sonarmvs
