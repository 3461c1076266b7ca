#include "sonarmvs/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sonarmvs/errors.hpp"

namespace sonarmvs {

namespace {

constexpr double kRotationTolerance = 1e-9;

void check_rotation(const Mat3& r) {
  if (!r.allFinite()) throw std::invalid_argument("pose rotation has non-finite entries");
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTolerance) {
    throw std::invalid_argument("pose rotation is not orthonormal (error " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw std::invalid_argument("pose rotation has determinant != +1");
  }
}

}  // namespace

Pose::Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
  if (!translation_.allFinite()) throw std::invalid_argument("pose translation is not finite");
}

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& translation) {
  return Pose(q.normalized().toRotationMatrix(), translation);
}

Pose Pose::roll(double angle) {
  return Pose(Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix(), Vec3::Zero());
}

Pose Pose::pitch(double angle) {
  return Pose(Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix(), Vec3::Zero());
}

Pose Pose::yaw(double angle) {
  return Pose(Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero());
}

Pose Pose::translation(const Vec3& t) { return Pose(Mat3::Identity(), t); }

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  // Canonical hemisphere so serialized poses are unique.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Pose Pose::inverse() const {
  Pose out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

bool Pose::is_exact_identity() const {
  return rotation_ == Mat3::Identity() && translation_ == Vec3::Zero();
}

bool Pose::approx_equal(const Pose& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

SonarIntrinsics SonarIntrinsics::defaults() {
  SonarIntrinsics k;
  k.range_min = 0.5;
  k.range_max = 2.5;
  k.azimuth_min = deg2rad(-14.0);
  k.azimuth_max = deg2rad(14.0);
  k.elevation_min = deg2rad(-7.0);
  k.elevation_max = deg2rad(7.0);
  k.range_bins = 512;
  k.azimuth_bins = 128;
  k.elevation_planes = 32;
  return k;
}

void SonarIntrinsics::validate() const {
  if (!(range_min < range_max)) throw ConfigError("intrinsics: range_min must be < range_max");
  if (range_min < 0.0) throw ConfigError("intrinsics: range_min must be >= 0");
  if (!(azimuth_min < azimuth_max)) {
    throw ConfigError("intrinsics: azimuth_min must be < azimuth_max");
  }
  if (!(elevation_min < elevation_max)) {
    throw ConfigError("intrinsics: elevation_min must be < elevation_max");
  }
  if (azimuth_min <= -std::numbers::pi || azimuth_max > std::numbers::pi) {
    throw ConfigError("intrinsics: azimuth extent must lie in (-pi, pi]");
  }
  if (elevation_min <= -std::numbers::pi / 2 || elevation_max >= std::numbers::pi / 2) {
    throw ConfigError("intrinsics: elevation extent must lie in (-pi/2, pi/2)");
  }
  if (range_bins < 2 || azimuth_bins < 2) throw ConfigError("intrinsics: H and W must be >= 2");
  if (elevation_planes < 2) throw ConfigError("intrinsics: N must be >= 2");
}

Vec3 spherical_to_euclidean(const SphericalPoint& p) {
  const double c = std::cos(p.elevation);
  return {p.range * c * std::cos(p.azimuth), p.range * c * std::sin(p.azimuth),
          p.range * std::sin(p.elevation)};
}

SphericalConversion euclidean_to_spherical(const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw DegeneratePointError("euclidean_to_spherical: zero-length point");
  SphericalConversion out;
  out.point.range = r;
  if (p.x() == 0.0 && p.y() == 0.0) {
    out.degenerate_azimuth = true;
    out.point.azimuth = 0.0;
    out.point.elevation = std::copysign(std::numbers::pi / 2, p.z());
    return out;
  }
  out.point.azimuth = std::atan2(p.y(), p.x());
  // atan2 form is better conditioned than asin(z / r) near the poles and
  // agrees with it everywhere else.
  out.point.elevation = std::atan2(p.z(), std::hypot(p.x(), p.y()));
  return out;
}

GridCoord image_to_grid(const ImagePoint& q, const SonarIntrinsics& k) {
  return {k.range_axis().index_of(q.range), k.azimuth_axis().index_of(q.azimuth)};
}

bool in_scope(const SphericalPoint& p, const SonarIntrinsics& k) {
  return p.range >= k.range_min && p.range <= k.range_max && p.azimuth >= k.azimuth_min &&
         p.azimuth <= k.azimuth_max && p.elevation >= k.elevation_min &&
         p.elevation <= k.elevation_max;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace sonarmvs
