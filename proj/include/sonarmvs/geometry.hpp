#pragma once

// Sonar-frame geometry. Axes: x forward along the acoustic axis, y toward
// positive azimuth, z toward positive elevation. Azimuth is measured from the
// acoustic axis (theta = 0 on-axis).

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sonarmvs/raster.hpp"

namespace sonarmvs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct SphericalPoint {
  double range = 0.0;      // meters
  double azimuth = 0.0;    // theta, radians
  double elevation = 0.0;  // phi, radians
};

/// Continuous (range, azimuth) image-plane coordinates before binning.
struct ImagePoint {
  double range = 0.0;
  double azimuth = 0.0;
};

/// Fractional raster indices; integer values are bin centers.
struct GridCoord {
  double row = 0.0;
  double col = 0.0;
};

struct SphericalConversion {
  SphericalPoint point;
  /// Set when x = y = 0: azimuth is undefined and reported as 0.
  bool degenerate_azimuth = false;
};

/// Rigid transform p -> R p + t. The rotation is checked for orthonormality
/// and unit determinant to 1e-9 on construction.
class Pose {
 public:
  Pose();
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& translation);
  /// Rotation about the sensor x (acoustic) axis.
  static Pose roll(double angle);
  static Pose pitch(double angle);
  static Pose yaw(double angle);
  static Pose translation(const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Eigen::Quaterniond quaternion() const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;
  /// (a * b).apply(p) == a.apply(b.apply(p)).
  friend Pose operator*(const Pose& a, const Pose& b);

  /// Exact (bitwise) identity; used to short-circuit resampling.
  bool is_exact_identity() const;
  bool approx_equal(const Pose& other, double tol) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Sensor scope and discretization. Angles in radians.
struct SonarIntrinsics {
  double range_min = 0.5;
  double range_max = 2.5;
  double azimuth_min = 0.0;
  double azimuth_max = 0.0;
  double elevation_min = 0.0;
  double elevation_max = 0.0;
  std::size_t range_bins = 512;       // H
  std::size_t azimuth_bins = 128;     // W
  std::size_t elevation_planes = 32;  // N

  /// 28 deg azimuth FoV, 14 deg elevation FoV, r in [0.5, 2.5] m, 512x128, N = 32.
  static SonarIntrinsics defaults();

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  Axis range_axis() const { return {range_min, range_max, range_bins}; }
  Axis azimuth_axis() const { return {azimuth_min, azimuth_max, azimuth_bins}; }
  Axis elevation_axis() const { return {elevation_min, elevation_max, elevation_planes}; }

  bool operator==(const SonarIntrinsics&) const = default;
};

Vec3 spherical_to_euclidean(const SphericalPoint& p);

/// Throws DegeneratePointError for the zero vector.
SphericalConversion euclidean_to_spherical(const Vec3& p);

inline Vec3 transform_point(const Pose& t, const Vec3& p) { return t.apply(p); }

inline ImagePoint project(const SphericalPoint& p) { return {p.range, p.azimuth}; }

GridCoord image_to_grid(const ImagePoint& q, const SonarIntrinsics& k);

bool in_scope(const SphericalPoint& p, const SonarIntrinsics& k);

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace sonarmvs
